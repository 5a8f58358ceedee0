#pragma once

#include "expdiff/expfam.hpp"

// Maps unconstrained inference-network outputs o in R^{2d} to hyperparameters
// (nu, tau) that lie strictly inside the finiteness domain of A_theta, with
// the 2x2 Jacobian per dimension for the chain rule.
//
// Non-normal conjugates parameterize the classical pair (alpha, beta) =
// softplus(o) + 1e-6 and convert; the normal conjugate parameterizes
// (mu0 free, tau = softplus + 1e-6). Classical space has box constraints,
// natural (nu, tau) space has coupled ones.

namespace expdiff {

struct ZetaAndJacobian {
    double nu = 0.0;
    double tau = 0.0;
    // d(nu,tau) / d(o1,o2): [dnu_do1, dnu_do2; dtau_do1, dtau_do2]
    double j[2][2] = {{0, 0}, {0, 0}};
};

class DomainMap {
public:
    explicit DomainMap(const LikelihoodFamily& family) : family_(family) {}
    const LikelihoodFamily& family() const { return family_; }

    // Per-dimension map; differentiable everywhere.
    ZetaAndJacobian map(double o1, double o2) const;

    // Network output layout: o1 = out[j], o2 = out[d + j].
    ConjugateHyperparams map_all(const Vec& net_out, std::size_t d) const;

private:
    LikelihoodFamily family_;
    static constexpr double kEps = 1e-6;
};

}  // namespace expdiff

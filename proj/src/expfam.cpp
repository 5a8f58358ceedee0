#include "expdiff/expfam.hpp"

#include <cmath>
#include <sstream>

#include "expdiff/errors.hpp"
#include "expdiff/special.hpp"

namespace expdiff {

namespace {

constexpr double kIntTol = 1e-9;  // integrality tolerance for discrete support
constexpr double kHalfLog2Pi = 0.91893853320467274178;

bool is_nonneg_int(double y) {
    return y >= -kIntTol && std::abs(y - std::round(y)) <= kIntTol;
}

[[noreturn]] void domain_fail(const LikelihoodFamily& f, const std::string& msg) {
    throw DomainError(f.str() + ": " + msg);
}

struct KindInfo {
    FamilyKind kind;
    const char* name;
};

constexpr KindInfo kKinds[] = {
    {FamilyKind::normal_fixed_var, "normal_fixed_var"},
    {FamilyKind::lognormal_fixed_var, "lognormal_fixed_var"},
    {FamilyKind::poisson, "poisson"},
    {FamilyKind::exponential, "exponential"},
    {FamilyKind::gamma_fixed_shape, "gamma_fixed_shape"},
    {FamilyKind::pareto_fixed_scale, "pareto_fixed_scale"},
    {FamilyKind::binomial, "binomial"},
    {FamilyKind::negbinomial, "negbinomial"},
    {FamilyKind::geometric, "geometric"},
    {FamilyKind::normal_fixed_mean, "normal_fixed_mean"},
    {FamilyKind::lognormal_fixed_mean, "lognormal_fixed_mean"},
    {FamilyKind::weibull_fixed_shape, "weibull_fixed_shape"},
};

const char* kind_name(FamilyKind k) {
    for (const auto& info : kKinds)
        if (info.kind == k) return info.name;
    return "?";
}

// Parses "name" or "name{key=val,key=val}"; used for families and links.
struct TagParams {
    std::string name;
    std::vector<std::pair<std::string, double>> params;
};

TagParams parse_tag(const std::string& text) {
    TagParams out;
    auto brace = text.find('{');
    if (brace == std::string::npos) {
        out.name = text;
        return out;
    }
    if (text.back() != '}')
        throw ConfigError("malformed spec string: " + text);
    out.name = text.substr(0, brace);
    std::string body = text.substr(brace + 1, text.size() - brace - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key=value in: " + text);
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        try {
            std::size_t pos = 0;
            double v = std::stod(val, &pos);
            if (pos != val.size()) throw std::invalid_argument(val);
            out.params.emplace_back(key, v);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric value '" + val + "' in: " + text);
        }
    }
    return out;
}

}  // namespace

std::vector<FamilyKind> all_family_kinds() {
    std::vector<FamilyKind> v;
    for (const auto& info : kKinds) v.push_back(info.kind);
    return v;
}

LikelihoodFamily LikelihoodFamily::parse(const std::string& text) {
    TagParams tag = parse_tag(text);
    LikelihoodFamily f;
    bool found = false;
    for (const auto& info : kKinds) {
        if (tag.name == info.name) {
            f.kind = info.kind;
            found = true;
            break;
        }
    }
    if (!found) throw ConfigError("unknown likelihood family: " + tag.name);
    for (const auto& [key, val] : tag.params) {
        if (key == "sigma2" && (f.kind == FamilyKind::normal_fixed_var ||
                                f.kind == FamilyKind::lognormal_fixed_var)) {
            f.sigma2 = val;
        } else if (key == "a" && f.kind == FamilyKind::gamma_fixed_shape) {
            f.a = val;
        } else if (key == "xm" && f.kind == FamilyKind::pareto_fixed_scale) {
            f.xm = val;
        } else if (key == "n" && f.kind == FamilyKind::binomial) {
            f.n = static_cast<int>(std::llround(val));
            if (std::abs(val - f.n) > kIntTol)
                throw ConfigError("binomial n must be an integer, got " + text);
        } else if (key == "r" && f.kind == FamilyKind::negbinomial) {
            f.r = static_cast<int>(std::llround(val));
            if (std::abs(val - f.r) > kIntTol)
                throw ConfigError("negbinomial r must be an integer, got " + text);
        } else if (key == "mu" && (f.kind == FamilyKind::normal_fixed_mean ||
                                   f.kind == FamilyKind::lognormal_fixed_mean)) {
            f.mu = val;
        } else if (key == "k" && f.kind == FamilyKind::weibull_fixed_shape) {
            f.k = val;
        } else {
            throw ConfigError("parameter '" + key + "' not valid for family " +
                              tag.name);
        }
    }
    f.validate();
    return f;
}

void LikelihoodFamily::validate() const {
    switch (kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            if (!(sigma2 > 0)) throw ConfigError(str() + ": sigma2 must be > 0");
            break;
        case FamilyKind::gamma_fixed_shape:
            if (!(a > 0)) throw ConfigError(str() + ": shape a must be > 0");
            break;
        case FamilyKind::pareto_fixed_scale:
            if (!(xm > 0)) throw ConfigError(str() + ": scale xm must be > 0");
            break;
        case FamilyKind::binomial:
            if (n < 1) throw ConfigError(str() + ": n must be >= 1");
            break;
        case FamilyKind::negbinomial:
            if (r < 1) throw ConfigError(str() + ": r must be >= 1");
            break;
        case FamilyKind::weibull_fixed_shape:
            if (!(k > 0)) throw ConfigError(str() + ": shape k must be > 0");
            break;
        default:
            break;
    }
}

std::string LikelihoodFamily::str() const {
    std::ostringstream os;
    os << kind_name(kind);
    switch (kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            os << "{sigma2=" << sigma2 << "}";
            break;
        case FamilyKind::gamma_fixed_shape:
            os << "{a=" << a << "}";
            break;
        case FamilyKind::pareto_fixed_scale:
            os << "{xm=" << xm << "}";
            break;
        case FamilyKind::binomial:
            os << "{n=" << n << "}";
            break;
        case FamilyKind::negbinomial:
            os << "{r=" << r << "}";
            break;
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean:
            os << "{mu=" << mu << "}";
            break;
        case FamilyKind::weibull_fixed_shape:
            os << "{k=" << k << "}";
            break;
        default:
            break;
    }
    return os.str();
}

ConjugateKind LikelihoodFamily::conjugate() const {
    switch (kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            return ConjugateKind::normal;
        case FamilyKind::poisson:
        case FamilyKind::exponential:
        case FamilyKind::gamma_fixed_shape:
        case FamilyKind::pareto_fixed_scale:
            return ConjugateKind::gamma;
        case FamilyKind::binomial:
        case FamilyKind::negbinomial:
        case FamilyKind::geometric:
            return ConjugateKind::beta;
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean:
        case FamilyKind::weibull_fixed_shape:
            return ConjugateKind::inverse_gamma;
    }
    return ConjugateKind::gamma;
}

bool value_in_support(const LikelihoodFamily& f, double y) {
    if (!std::isfinite(y)) return false;
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::normal_fixed_mean:
            return true;
        case FamilyKind::lognormal_fixed_var:
        case FamilyKind::lognormal_fixed_mean:
        case FamilyKind::gamma_fixed_shape:
        case FamilyKind::weibull_fixed_shape:
            return y > 0;
        case FamilyKind::exponential:
            return y >= 0;
        case FamilyKind::pareto_fixed_scale:
            return y >= f.xm;
        case FamilyKind::poisson:
        case FamilyKind::negbinomial:
        case FamilyKind::geometric:
            return is_nonneg_int(y);
        case FamilyKind::binomial:
            return is_nonneg_int(y) && std::round(y) <= f.n;
    }
    return false;
}

void check_support(const LikelihoodFamily& f, double y) {
    if (!value_in_support(f, y))
        domain_fail(f, "value " + std::to_string(y) + " outside support");
}

double suff_stat(const LikelihoodFamily& f, double y) {
    check_support(f, y);
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::poisson:
        case FamilyKind::exponential:
        case FamilyKind::gamma_fixed_shape:
        case FamilyKind::binomial:
        case FamilyKind::negbinomial:
        case FamilyKind::geometric:
            return y;
        case FamilyKind::lognormal_fixed_var:
        case FamilyKind::pareto_fixed_scale:
            return std::log(y);
        case FamilyKind::normal_fixed_mean:
            return -0.5 * y * y + f.mu * y;
        case FamilyKind::lognormal_fixed_mean: {
            const double ly = std::log(y);
            return -0.5 * ly * ly + f.mu * ly;
        }
        case FamilyKind::weibull_fixed_shape:
            return std::pow(y, f.k);
    }
    return 0.0;
}

double log_base_measure(const LikelihoodFamily& f, double y, double exposure) {
    check_support(f, y);
    if (exposure != 1.0 && !f.supports_exposure())
        domain_fail(f, "non-unit exposure is defined only for poisson");
    if (!(exposure > 0)) domain_fail(f, "exposure must be positive");
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
            return -kHalfLog2Pi - 0.5 * std::log(f.sigma2) -
                   y * y / (2.0 * f.sigma2);
        case FamilyKind::lognormal_fixed_var: {
            const double ly = std::log(y);
            return -kHalfLog2Pi - 0.5 * std::log(f.sigma2) - ly -
                   ly * ly / (2.0 * f.sigma2);
        }
        case FamilyKind::poisson: {
            const double yr = std::round(y);
            double lh = -lgamma_pos(yr + 1.0);
            if (exposure != 1.0) lh += yr * std::log(exposure);
            return lh;
        }
        case FamilyKind::exponential:
        case FamilyKind::pareto_fixed_scale:
        case FamilyKind::geometric:
            return 0.0;
        case FamilyKind::gamma_fixed_shape:
            return (f.a - 1.0) * std::log(y) - lgamma_pos(f.a);
        case FamilyKind::binomial: {
            const double yr = std::round(y);
            return lgamma_pos(f.n + 1.0) - lgamma_pos(yr + 1.0) -
                   lgamma_pos(f.n - yr + 1.0);
        }
        case FamilyKind::negbinomial: {
            const double yr = std::round(y);
            return lgamma_pos(yr + f.r) - lgamma_pos(yr + 1.0) - lgamma_pos(f.r);
        }
        case FamilyKind::normal_fixed_mean:
            return -kHalfLog2Pi;
        case FamilyKind::lognormal_fixed_mean:
            return -kHalfLog2Pi - std::log(y);
        case FamilyKind::weibull_fixed_shape:
            return std::log(f.k) + (f.k - 1.0) * std::log(y);
    }
    return 0.0;
}

bool theta_in_domain(const LikelihoodFamily& f, double theta) {
    if (!std::isfinite(theta)) return false;
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            return true;
        case FamilyKind::binomial:
        case FamilyKind::negbinomial:
        case FamilyKind::geometric:
            return theta > 0 && theta < 1;
        default:
            return theta > 0;
    }
}

namespace {
void check_theta(const LikelihoodFamily& f, double theta) {
    if (!theta_in_domain(f, theta))
        domain_fail(f, "parameter " + std::to_string(theta) +
                           " outside parameter space");
}
}  // namespace

double natural_param(const LikelihoodFamily& f, double theta) {
    check_theta(f, theta);
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            return theta / f.sigma2;
        case FamilyKind::poisson:
            return std::log(theta);
        case FamilyKind::exponential:
        case FamilyKind::gamma_fixed_shape:
            return -theta;
        case FamilyKind::pareto_fixed_scale:
            return -theta - 1.0;
        case FamilyKind::binomial:
            return std::log(theta / (1.0 - theta));
        case FamilyKind::negbinomial:
        case FamilyKind::geometric:
            return std::log1p(-theta);
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean:
            return 1.0 / theta;
        case FamilyKind::weibull_fixed_shape:
            return -1.0 / theta;
    }
    return 0.0;
}

double lik_log_partition(const LikelihoodFamily& f, double theta) {
    check_theta(f, theta);
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            return theta * theta / (2.0 * f.sigma2);
        case FamilyKind::poisson:
            return theta;
        case FamilyKind::exponential:
            return -std::log(theta);
        case FamilyKind::gamma_fixed_shape:
            return -f.a * std::log(theta);
        case FamilyKind::pareto_fixed_scale:
            return -std::log(theta) - theta * std::log(f.xm);
        case FamilyKind::binomial:
            return -f.n * std::log1p(-theta);
        case FamilyKind::negbinomial:
            return -f.r * std::log(theta);
        case FamilyKind::geometric:
            return -std::log(theta);
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean:
            return f.mu * f.mu / (2.0 * theta) + 0.5 * std::log(theta);
        case FamilyKind::weibull_fixed_shape:
            return std::log(theta);
    }
    return 0.0;
}

double log_lik_scalar(const LikelihoodFamily& f, double y, double theta,
                      double exposure) {
    const double count = f.supports_exposure() ? exposure : 1.0;
    return log_base_measure(f, y, exposure) +
           natural_param(f, theta) * suff_stat(f, y) -
           count * lik_log_partition(f, theta);
}

// ---- Conjugate prior -----------------------------------------------------

bool zeta_in_domain(const LikelihoodFamily& f, double nu, double tau) {
    if (!std::isfinite(nu) || !std::isfinite(tau)) return false;
    switch (f.conjugate()) {
        case ConjugateKind::normal:
            return tau > 0;
        case ConjugateKind::gamma:
            switch (f.kind) {
                case FamilyKind::poisson:
                    return nu > -1 && tau > 0;
                case FamilyKind::exponential:
                    return tau > -1 && nu > 0;
                case FamilyKind::gamma_fixed_shape:
                    return tau * f.a > -1 && nu > 0;
                case FamilyKind::pareto_fixed_scale:
                    return tau > -1 && nu - tau * std::log(f.xm) > 0;
                default:
                    return false;
            }
        case ConjugateKind::beta:
            switch (f.kind) {
                case FamilyKind::binomial:
                    return nu > -1 && tau * f.n - nu > -1;
                case FamilyKind::negbinomial:
                    return nu > -1 && tau * f.r > -1;
                case FamilyKind::geometric:
                    return nu > -1 && tau > -1;
                default:
                    return false;
            }
        case ConjugateKind::inverse_gamma:
            if (f.kind == FamilyKind::weibull_fixed_shape)
                return tau > 1 && nu > 0;
            return tau > 2 && tau * f.mu * f.mu / 2.0 - nu > 0;
    }
    return false;
}

namespace {
void check_zeta(const LikelihoodFamily& f, double nu, double tau) {
    if (zeta_in_domain(f, nu, tau)) return;
    std::ostringstream os;
    os << "hyperparameters (nu=" << nu << ", tau=" << tau
       << ") outside the finiteness domain of A_theta";
    switch (f.conjugate()) {
        case ConjugateKind::normal:
            os << " (requires tau > 0)";
            break;
        case ConjugateKind::gamma:
            if (f.kind == FamilyKind::poisson)
                os << " (requires nu > -1 and tau > 0)";
            else if (f.kind == FamilyKind::exponential)
                os << " (requires tau > -1 and nu > 0)";
            else if (f.kind == FamilyKind::gamma_fixed_shape)
                os << " (requires tau*a > -1 and nu > 0)";
            else
                os << " (requires tau > -1 and nu - tau*log(xm) > 0)";
            break;
        case ConjugateKind::beta:
            if (f.kind == FamilyKind::binomial)
                os << " (requires nu > -1 and tau*n - nu > -1)";
            else if (f.kind == FamilyKind::negbinomial)
                os << " (requires nu > -1 and tau*r > -1)";
            else
                os << " (requires nu > -1 and tau > -1)";
            break;
        case ConjugateKind::inverse_gamma:
            if (f.kind == FamilyKind::weibull_fixed_shape)
                os << " (requires tau > 1 and nu > 0)";
            else
                os << " (requires tau > 2 and tau*mu^2/2 - nu > 0)";
            break;
    }
    domain_fail(f, os.str());
}
}  // namespace

double prior_log_partition(const LikelihoodFamily& f, double nu, double tau) {
    check_zeta(f, nu, tau);
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            return nu * nu / (2.0 * tau * f.sigma2) -
                   0.5 * std::log(tau / f.sigma2);
        case FamilyKind::poisson:
            return lgamma_pos(nu + 1.0) - (nu + 1.0) * std::log(tau);
        case FamilyKind::exponential:
            return lgamma_pos(tau + 1.0) - (tau + 1.0) * std::log(nu);
        case FamilyKind::gamma_fixed_shape:
            return lgamma_pos(tau * f.a + 1.0) -
                   (tau * f.a + 1.0) * std::log(nu);
        case FamilyKind::pareto_fixed_scale: {
            const double b = nu - tau * std::log(f.xm);
            return lgamma_pos(tau + 1.0) - nu - (tau + 1.0) * std::log(b);
        }
        case FamilyKind::binomial:
            return lgamma_pos(nu + 1.0) + lgamma_pos(tau * f.n - nu + 1.0) -
                   lgamma_pos(tau * f.n + 2.0);
        case FamilyKind::negbinomial:
            return lgamma_pos(tau * f.r + 1.0) + lgamma_pos(nu + 1.0) -
                   lgamma_pos(tau * f.r + nu + 2.0);
        case FamilyKind::geometric:
            return lgamma_pos(tau + 1.0) + lgamma_pos(nu + 1.0) -
                   lgamma_pos(tau + nu + 2.0);
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean: {
            const double b = tau * f.mu * f.mu / 2.0 - nu;
            return lgamma_pos(tau / 2.0 - 1.0) -
                   (tau / 2.0 - 1.0) * std::log(b);
        }
        case FamilyKind::weibull_fixed_shape:
            return lgamma_pos(tau - 1.0) - (tau - 1.0) * std::log(nu);
    }
    return 0.0;
}

AThetaGrad prior_log_partition_grad(const LikelihoodFamily& f, double nu,
                                    double tau) {
    check_zeta(f, nu, tau);
    AThetaGrad g;
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            g.d_nu = nu / (tau * f.sigma2);
            g.d_tau = -nu * nu / (2.0 * tau * tau * f.sigma2) - 0.5 / tau;
            break;
        case FamilyKind::poisson:
            g.d_nu = digamma_pos(nu + 1.0) - std::log(tau);
            g.d_tau = -(nu + 1.0) / tau;
            break;
        case FamilyKind::exponential:
            g.d_nu = -(tau + 1.0) / nu;
            g.d_tau = digamma_pos(tau + 1.0) - std::log(nu);
            break;
        case FamilyKind::gamma_fixed_shape:
            g.d_nu = -(tau * f.a + 1.0) / nu;
            g.d_tau = f.a * (digamma_pos(tau * f.a + 1.0) - std::log(nu));
            break;
        case FamilyKind::pareto_fixed_scale: {
            const double lxm = std::log(f.xm);
            const double b = nu - tau * lxm;
            g.d_nu = -1.0 - (tau + 1.0) / b;
            g.d_tau = digamma_pos(tau + 1.0) - std::log(b) + (tau + 1.0) * lxm / b;
            break;
        }
        case FamilyKind::binomial:
            g.d_nu = digamma_pos(nu + 1.0) - digamma_pos(tau * f.n - nu + 1.0);
            g.d_tau = f.n * (digamma_pos(tau * f.n - nu + 1.0) -
                             digamma_pos(tau * f.n + 2.0));
            break;
        case FamilyKind::negbinomial:
            g.d_nu = digamma_pos(nu + 1.0) - digamma_pos(tau * f.r + nu + 2.0);
            g.d_tau = f.r * (digamma_pos(tau * f.r + 1.0) -
                             digamma_pos(tau * f.r + nu + 2.0));
            break;
        case FamilyKind::geometric:
            g.d_nu = digamma_pos(nu + 1.0) - digamma_pos(tau + nu + 2.0);
            g.d_tau = digamma_pos(tau + 1.0) - digamma_pos(tau + nu + 2.0);
            break;
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean: {
            const double b = tau * f.mu * f.mu / 2.0 - nu;
            const double c = tau / 2.0 - 1.0;
            g.d_nu = c / b;
            g.d_tau = 0.5 * digamma_pos(c) - 0.5 * std::log(b) -
                      c * (f.mu * f.mu / 2.0) / b;
            break;
        }
        case FamilyKind::weibull_fixed_shape:
            g.d_nu = -(tau - 1.0) / nu;
            g.d_tau = digamma_pos(tau - 1.0) - std::log(nu);
            break;
    }
    return g;
}

double log_prior_density(const LikelihoodFamily& f, double theta, double nu,
                         double tau) {
    // h_theta is 1 for every family except the normal conjugate, where it is
    // (2*pi)^{-1/2} per dimension.
    double log_h_theta = 0.0;
    if (f.conjugate() == ConjugateKind::normal) log_h_theta = -kHalfLog2Pi;
    return log_h_theta + nu * natural_param(f, theta) -
           tau * lik_log_partition(f, theta) - prior_log_partition(f, nu, tau);
}

std::pair<double, double> zeta_to_classical(const LikelihoodFamily& f,
                                            double nu, double tau) {
    check_zeta(f, nu, tau);
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            // (mu0, var0)
            return {nu / tau, f.sigma2 / tau};
        case FamilyKind::poisson:
            return {nu + 1.0, tau};
        case FamilyKind::exponential:
            return {tau + 1.0, nu};
        case FamilyKind::gamma_fixed_shape:
            return {tau * f.a + 1.0, nu};
        case FamilyKind::pareto_fixed_scale:
            return {tau + 1.0, nu - tau * std::log(f.xm)};
        case FamilyKind::binomial:
            return {nu + 1.0, tau * f.n - nu + 1.0};
        case FamilyKind::negbinomial:
            return {tau * f.r + 1.0, nu + 1.0};
        case FamilyKind::geometric:
            return {tau + 1.0, nu + 1.0};
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean:
            return {tau / 2.0 - 1.0, tau * f.mu * f.mu / 2.0 - nu};
        case FamilyKind::weibull_fixed_shape:
            return {tau - 1.0, nu};
    }
    return {0, 0};
}

std::pair<double, double> classical_to_zeta(const LikelihoodFamily& f,
                                            double p1, double p2) {
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
        case FamilyKind::lognormal_fixed_var:
            if (!(p2 > 0)) domain_fail(f, "prior variance must be > 0");
            return {f.sigma2 * p1 / p2, f.sigma2 / p2};
        default:
            if (!(p1 > 0 && p2 > 0))
                domain_fail(f, "classical prior parameters must be > 0");
            break;
    }
    switch (f.kind) {
        case FamilyKind::poisson:
            return {p1 - 1.0, p2};
        case FamilyKind::exponential:
            return {p2, p1 - 1.0};
        case FamilyKind::gamma_fixed_shape:
            return {p2, (p1 - 1.0) / f.a};
        case FamilyKind::pareto_fixed_scale:
            return {(p1 - 1.0) * std::log(f.xm) + p2, p1 - 1.0};
        case FamilyKind::binomial:
            return {p1 - 1.0, (p1 + p2 - 2.0) / f.n};
        case FamilyKind::negbinomial:
            return {p2 - 1.0, (p1 - 1.0) / f.r};
        case FamilyKind::geometric:
            return {p2 - 1.0, p1 - 1.0};
        case FamilyKind::normal_fixed_mean:
        case FamilyKind::lognormal_fixed_mean:
            return {f.mu * f.mu * (p1 + 1.0) - p2, 2.0 * (p1 + 1.0)};
        case FamilyKind::weibull_fixed_shape:
            return {p2, p1 + 1.0};
        default:
            break;
    }
    return {0, 0};
}

// ---- Aggregation and evidence -------------------------------------------

void ObservationSet::validate() const {
    if (mask.size() != values.rows * values.cols)
        throw ConfigError("observation mask shape mismatch");
    if (exposure.size() != values.cols)
        throw ConfigError("exposure length must equal dimension");
    for (std::size_t j = 0; j < exposure.size(); ++j) {
        if (!(exposure[j] > 0))
            throw DomainError(family.str() + ": exposure must be positive");
        if (exposure[j] != 1.0 && !family.supports_exposure())
            throw DomainError(family.str() +
                              ": non-unit exposure is defined only for poisson");
    }
    for (std::size_t i = 0; i < values.rows; ++i)
        for (std::size_t j = 0; j < values.cols; ++j)
            if (observed(i, j)) check_support(family, values(i, j));
}

SuffStatsAgg aggregate(const ObservationSet& obs) {
    obs.validate();
    const std::size_t d = obs.dim();
    SuffStatsAgg agg;
    agg.t_sum.assign(d, 0.0);
    agg.count.assign(d, 0.0);
    agg.log_h = 0.0;
    for (std::size_t i = 0; i < obs.n_samples(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!obs.observed(i, j)) continue;
            const double y = obs.values(i, j);
            const double c = obs.exposure[j];
            agg.t_sum[j] += suff_stat(obs.family, y);
            agg.count[j] += obs.family.supports_exposure() ? c : 1.0;
            agg.log_h += log_base_measure(obs.family, y, c);
        }
    }
    return agg;
}

double log_evidence(const LikelihoodFamily& f, const SuffStatsAgg& agg,
                    const ConjugateHyperparams& zeta) {
    const std::size_t d = agg.dim();
    if (zeta.nu.size() != d || zeta.tau.size() != d)
        throw ConfigError("hyperparameter dimension mismatch");
    double acc = agg.log_h;
    for (std::size_t j = 0; j < d; ++j) {
        if (agg.count[j] == 0.0 && agg.t_sum[j] == 0.0) continue;
        double a0, a1;
        try {
            a0 = prior_log_partition(f, zeta.nu[j], zeta.tau[j]);
            a1 = prior_log_partition(f, zeta.nu[j] + agg.t_sum[j],
                                     zeta.tau[j] + agg.count[j]);
        } catch (const DomainError& e) {
            throw DomainError("log_evidence at dimension " + std::to_string(j) +
                              ": " + e.what());
        }
        acc += a1 - a0;
    }
    return acc;
}

ConjugateHyperparams posterior_update(const ConjugateHyperparams& zeta,
                                      const SuffStatsAgg& agg) {
    ConjugateHyperparams out = zeta;
    for (std::size_t j = 0; j < agg.dim(); ++j) {
        out.nu[j] += agg.t_sum[j];
        out.tau[j] += agg.count[j];
    }
    return out;
}

double log_likelihood(const LikelihoodFamily& f, const SuffStatsAgg& agg,
                      const Vec& theta) {
    double acc = agg.log_h;
    for (std::size_t j = 0; j < agg.dim(); ++j) {
        if (agg.count[j] == 0.0 && agg.t_sum[j] == 0.0) continue;
        acc += natural_param(f, theta[j]) * agg.t_sum[j] -
               agg.count[j] * lik_log_partition(f, theta[j]);
    }
    return acc;
}

// ---- Simulation ----------------------------------------------------------

namespace {

double sample_poisson(double lambda, Rng& rng) {
    // Knuth's method, chunked so the per-chunk rate stays small.
    double total = 0.0;
    while (lambda > 25.0) {
        // Additivity: Poisson(lambda) = Poisson(20) + Poisson(lambda - 20).
        double l = std::exp(-20.0);
        double p = 1.0;
        long n = -1;
        do {
            ++n;
            p *= rng.u01_open();
        } while (p > l);
        total += n;
        lambda -= 20.0;
    }
    const double l = std::exp(-lambda);
    double p = 1.0;
    long n = -1;
    do {
        ++n;
        p *= rng.u01_open();
    } while (p > l);
    return total + n;
}

double sample_std_gamma(double shape, Rng& rng) {
    // Marsaglia-Tsang; boost for shape < 1.
    if (shape < 1.0) {
        const double u = rng.u01_open();
        return sample_std_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.u01_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace

double sample_observation(const LikelihoodFamily& f, double theta, Rng& rng,
                          double exposure) {
    check_theta(f, theta);
    if (exposure != 1.0 && !f.supports_exposure())
        domain_fail(f, "non-unit exposure is defined only for poisson");
    switch (f.kind) {
        case FamilyKind::normal_fixed_var:
            return theta + std::sqrt(f.sigma2) * rng.normal();
        case FamilyKind::lognormal_fixed_var:
            return std::exp(theta + std::sqrt(f.sigma2) * rng.normal());
        case FamilyKind::poisson:
            return sample_poisson(theta * exposure, rng);
        case FamilyKind::exponential:
            return -std::log(rng.u01_open()) / theta;
        case FamilyKind::gamma_fixed_shape:
            return sample_std_gamma(f.a, rng) / theta;
        case FamilyKind::pareto_fixed_scale:
            return f.xm * std::pow(rng.u01_open(), -1.0 / theta);
        case FamilyKind::binomial: {
            long s = 0;
            for (int i = 0; i < f.n; ++i) s += rng.u01() < theta ? 1 : 0;
            return static_cast<double>(s);
        }
        case FamilyKind::negbinomial: {
            double s = 0.0;
            for (int i = 0; i < f.r; ++i)
                s += std::floor(std::log(rng.u01_open()) / std::log1p(-theta));
            return s;
        }
        case FamilyKind::geometric:
            return std::floor(std::log(rng.u01_open()) / std::log1p(-theta));
        case FamilyKind::normal_fixed_mean:
            return f.mu + std::sqrt(theta) * rng.normal();
        case FamilyKind::lognormal_fixed_mean:
            return std::exp(f.mu + std::sqrt(theta) * rng.normal());
        case FamilyKind::weibull_fixed_shape:
            return std::pow(theta, 1.0 / f.k) *
                   std::pow(-std::log(rng.u01_open()), 1.0 / f.k);
    }
    return 0.0;
}

}  // namespace expdiff

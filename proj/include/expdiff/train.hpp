#pragma once

#include <functional>
#include <optional>
#include <string>

#include "expdiff/domain_map.hpp"
#include "expdiff/gp.hpp"
#include "expdiff/link.hpp"
#include "expdiff/net.hpp"
#include "expdiff/sde.hpp"

// Trainers for the score network (denoising score matching with the
// noise-prediction parameterization) and the inference network (amortized
// variational objective A_theta(zeta(x_t)) - zeta(x_t)^T T_theta(g^{-1}(x0))).

namespace expdiff {

struct TrainConfig {
    long steps = 20000;
    std::size_t batch_size = 256;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    long log_every = 500;
    std::size_t time_embed_len = 64;
    std::vector<std::size_t> hidden = {96, 96, 96, 96, 96, 96};

    void validate() const;
};

// Source of x0 draws: a GP prior or a fixed dataset of rows.
class PriorSource {
public:
    explicit PriorSource(GpFactor gp) : gp_(std::move(gp)) {}
    explicit PriorSource(Mat dataset);

    std::size_t dim() const;
    Vec draw(Rng& rng) const;

private:
    std::optional<GpFactor> gp_;
    std::optional<Mat> dataset_;
};

struct TrainLogRow {
    long step = 0;
    double loss = 0.0;
};

struct TrainResult {
    DenseNetwork net;
    std::vector<TrainLogRow> log;
};

// Mean over batch and coordinates of ||eps_hat(x_t, t) - z||^2 with
// t ~ U(eps, 1) per example; equals the lambda(t)-weighted DSM objective
// under the noise-prediction parameterization.
double dsm_loss(const DenseNetwork& net, const DiffusionSchedule& sched,
                const Mat& x0_batch, Rng& rng);

// Mean over batch of sum_j [A_theta(zeta_j) - nu_j eta_j + tau_j A_y_j]
// with zeta = domain_map(net(x_t, t)). May legitimately be negative.
double avi_loss(const DenseNetwork& net, const DomainMap& domain_map,
                const LikelihoodFamily& family, const LinkSpec& link,
                const DiffusionSchedule& sched, const Mat& x0_batch, Rng& rng);

// Train the score network; on divergence (NaN loss) saves the last
// checkpoint to checkpoint_path (when set) and throws NumericalError.
TrainResult train_score(const TrainConfig& cfg, const PriorSource& prior,
                        const DiffusionSchedule& sched,
                        const std::string& checkpoint_path = "");

struct InferenceTrainResult {
    DenseNetwork net;
    DomainMap domain_map;
    std::vector<TrainLogRow> log;
};

InferenceTrainResult train_inference(const TrainConfig& cfg,
                                     const PriorSource& prior,
                                     const LikelihoodFamily& family,
                                     const LinkSpec& link,
                                     const DiffusionSchedule& sched,
                                     const std::string& checkpoint_path = "");

void write_train_log(const std::vector<TrainLogRow>& log,
                     const std::string& path);

}  // namespace expdiff

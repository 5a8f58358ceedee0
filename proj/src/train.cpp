#include "expdiff/train.hpp"

#include <cmath>
#include <fstream>

#include "expdiff/errors.hpp"

namespace expdiff {

void TrainConfig::validate() const {
    if (steps <= 0 || batch_size == 0) throw ConfigError("train: positive counts required");
    if (!(lr > 0)) throw ConfigError("train: lr must be > 0");
    if (log_every <= 0) throw ConfigError("train: log_every must be > 0");
}

PriorSource::PriorSource(Mat dataset) : dataset_(std::move(dataset)) {
    if (dataset_->rows == 0) throw ConfigError("prior dataset is empty");
}

std::size_t PriorSource::dim() const {
    return gp_ ? gp_->dim() : dataset_->cols;
}

Vec PriorSource::draw(Rng& rng) const {
    if (gp_) return gp_sample(*gp_, rng);
    const std::size_t row = rng.uniform_index(dataset_->rows);
    return Vec(dataset_->row(row), dataset_->row(row) + dataset_->cols);
}

namespace {

double sample_time(const DiffusionSchedule& sched, Rng& rng) {
    return sched.eps + (1.0 - sched.eps) * rng.u01();
}

// One DSM example: returns the per-example loss and, if grads != null,
// accumulates d(loss)/d(params) scaled by `grad_scale`.
double dsm_example(const DenseNetwork& net, const DiffusionSchedule& sched,
                   const Vec& x0, Rng& rng, DenseNetwork::Workspace& ws,
                   DenseNetwork::Gradients* grads, double grad_scale) {
    const std::size_t d = x0.size();
    const double t = sample_time(sched, rng);
    Vec z;
    const Vec xt = sample_forward(sched, x0, t, rng, z);
    const Vec& eps_hat = net.forward(xt, t, ws);
    double loss = 0.0;
    Vec cot(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = eps_hat[j] - z[j];
        loss += diff * diff;
        cot[j] = 2.0 * diff / static_cast<double>(d) * grad_scale;
    }
    loss /= static_cast<double>(d);
    if (grads) net.backward(ws, cot, grads, nullptr);
    return loss;
}

// One AVI example; cotangent on the network output goes through the domain
// map Jacobian, dA_theta/dzeta, and -T_theta.
double avi_example(const DenseNetwork& net, const DomainMap& dm,
                   const LikelihoodFamily& family, const LinkSpec& link,
                   const DiffusionSchedule& sched, const Vec& x0, Rng& rng,
                   DenseNetwork::Workspace& ws, DenseNetwork::Gradients* grads,
                   double grad_scale) {
    const std::size_t d = x0.size();
    const double t = sample_time(sched, rng);
    const Vec xt = sample_forward(sched, x0, t, rng);
    const Vec& out = net.forward(xt, t, ws);
    const auto [eta, neg_ay] = t_theta(family, link, x0);

    double loss = 0.0;
    Vec cot(2 * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        const ZetaAndJacobian zj = dm.map(out[j], out[d + j]);
        const double a_theta = prior_log_partition(family, zj.nu, zj.tau);
        if (!std::isfinite(a_theta))
            throw NumericalError("avi_loss: non-finite A_theta at dimension " +
                                 std::to_string(j) + " (nu=" +
                                 std::to_string(zj.nu) + ", tau=" +
                                 std::to_string(zj.tau) + ")");
        // zeta^T T_theta = nu*eta - tau*A_y.
        loss += a_theta - zj.nu * eta[j] + zj.tau * (-neg_ay[j]);
        if (grads) {
            const AThetaGrad ag = prior_log_partition_grad(family, zj.nu, zj.tau);
            const double dnu = ag.d_nu - eta[j];
            const double dtau = ag.d_tau - neg_ay[j];
            cot[j] = (dnu * zj.j[0][0] + dtau * zj.j[1][0]) * grad_scale;
            cot[d + j] = (dnu * zj.j[0][1] + dtau * zj.j[1][1]) * grad_scale;
        }
    }
    if (grads) net.backward(ws, cot, grads, nullptr);
    return loss;
}

}  // namespace

double dsm_loss(const DenseNetwork& net, const DiffusionSchedule& sched,
                const Mat& x0_batch, Rng& rng) {
    DenseNetwork::Workspace ws;
    double total = 0.0;
    for (std::size_t i = 0; i < x0_batch.rows; ++i) {
        Vec x0(x0_batch.row(i), x0_batch.row(i) + x0_batch.cols);
        total += dsm_example(net, sched, x0, rng, ws, nullptr, 0.0);
    }
    return total / static_cast<double>(x0_batch.rows);
}

double avi_loss(const DenseNetwork& net, const DomainMap& domain_map,
                const LikelihoodFamily& family, const LinkSpec& link,
                const DiffusionSchedule& sched, const Mat& x0_batch, Rng& rng) {
    DenseNetwork::Workspace ws;
    double total = 0.0;
    for (std::size_t i = 0; i < x0_batch.rows; ++i) {
        Vec x0(x0_batch.row(i), x0_batch.row(i) + x0_batch.cols);
        total += avi_example(net, domain_map, family, link, sched, x0, rng, ws,
                             nullptr, 0.0);
    }
    return total / static_cast<double>(x0_batch.rows);
}

namespace {

// Shared training loop; `example_fn` runs one example with gradients.
TrainResult run_training(
    const TrainConfig& cfg, const PriorSource& prior,
    const DiffusionSchedule& sched, std::size_t output_dim,
    const std::string& checkpoint_path,
    const std::function<double(const DenseNetwork&, const Vec&, Rng&,
                               DenseNetwork::Workspace&,
                               DenseNetwork::Gradients*, double)>& example_fn) {
    cfg.validate();
    sched.validate();

    NetConfig nc;
    nc.input_dim = prior.dim();
    nc.time_embed_len = cfg.time_embed_len;
    nc.hidden = cfg.hidden;
    nc.output_dim = output_dim;

    Rng rng(derive_seed(cfg.seed, 0));
    DenseNetwork net(nc);
    net.init(rng);
    AdamState adam = AdamState::create(net, cfg.lr);
    auto grads = net.make_gradients();
    DenseNetwork::Workspace ws;

    DenseNetwork checkpoint = net;
    TrainResult result;
    const double scale = 1.0 / static_cast<double>(cfg.batch_size);
    for (long step = 1; step <= cfg.steps; ++step) {
        grads.zero();
        double loss = 0.0;
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            const Vec x0 = prior.draw(rng);
            loss += example_fn(net, x0, rng, ws, &grads, scale);
        }
        loss *= scale;
        if (!std::isfinite(loss)) {
            if (!checkpoint_path.empty())
                save_network(checkpoint, checkpoint_path);
            throw NumericalError("training diverged (non-finite loss) at step " +
                                 std::to_string(step));
        }
        adam_step(adam, net, grads);
        if (step % cfg.log_every == 0 || step == cfg.steps) {
            result.log.push_back({step, loss});
            checkpoint = net;
        }
    }
    result.net = std::move(net);
    return result;
}

}  // namespace

TrainResult train_score(const TrainConfig& cfg, const PriorSource& prior,
                        const DiffusionSchedule& sched,
                        const std::string& checkpoint_path) {
    return run_training(
        cfg, prior, sched, prior.dim(), checkpoint_path,
        [&sched](const DenseNetwork& net, const Vec& x0, Rng& rng,
                 DenseNetwork::Workspace& ws, DenseNetwork::Gradients* grads,
                 double scale) {
            return dsm_example(net, sched, x0, rng, ws, grads, scale);
        });
}

InferenceTrainResult train_inference(const TrainConfig& cfg,
                                     const PriorSource& prior,
                                     const LikelihoodFamily& family,
                                     const LinkSpec& link,
                                     const DiffusionSchedule& sched,
                                     const std::string& checkpoint_path) {
    DomainMap dm(family);
    TrainResult r = run_training(
        cfg, prior, sched, 2 * prior.dim(), checkpoint_path,
        [&](const DenseNetwork& net, const Vec& x0, Rng& rng,
            DenseNetwork::Workspace& ws, DenseNetwork::Gradients* grads,
            double scale) {
            return avi_example(net, dm, family, link, sched, x0, rng, ws, grads,
                               scale);
        });
    return {std::move(r.net), dm, std::move(r.log)};
}

void write_train_log(const std::vector<TrainLogRow>& log,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open training log for writing: " + path);
    out << "step,loss\n";
    char buf[64];
    for (const auto& row : log) {
        std::snprintf(buf, sizeof(buf), "%ld,%.17g\n", row.step, row.loss);
        out << buf;
    }
}

}  // namespace expdiff

#include "expdiff/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "expdiff/errors.hpp"
#include "expdiff/kernels.hpp"

namespace expdiff {

using json = nlohmann::json;

Vec time_embed(double t, std::size_t len) {
    if (len == 0 || len % 2 != 0)
        throw ConfigError("time embedding length must be even and positive");
    if (!(t >= 0.0 && t <= 1.0))
        throw DomainError("time embedding defined on t in [0, 1]");
    const double ts = 1000.0 * t;
    const std::size_t half = len / 2;
    Vec out(len);
    for (std::size_t k = 0; k < half; ++k) {
        const double omega =
            std::pow(10000.0, -2.0 * static_cast<double>(k) /
                                  static_cast<double>(len));
        out[2 * k] = std::sin(ts * omega);
        out[2 * k + 1] = std::cos(ts * omega);
    }
    return out;
}

void NetConfig::validate() const {
    if (input_dim == 0 || output_dim == 0)
        throw ConfigError("network dimensions must be positive");
    if (time_embed_len % 2 != 0)
        throw ConfigError("time embedding length must be even");
    for (std::size_t h : hidden)
        if (h == 0) throw ConfigError("hidden widths must be positive");
}

DenseNetwork::DenseNetwork(const NetConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    std::size_t in = cfg_.first_layer_in();
    for (std::size_t h : cfg_.hidden) {
        W_.emplace_back(h, in);
        b_.emplace_back(h, 0.0);
        in = h;
    }
    W_.emplace_back(cfg_.output_dim, in);
    b_.emplace_back(cfg_.output_dim, 0.0);
}

std::size_t DenseNetwork::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < W_.size(); ++l)
        n += W_[l].data.size() + b_[l].size();
    return n;
}

void DenseNetwork::init(Rng& rng) {
    for (auto& W : W_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(W.cols));
        for (double& w : W.data) w = bound * (2.0 * rng.u01() - 1.0);
    }
    for (auto& b : b_) std::fill(b.begin(), b.end(), 0.0);
}

DenseNetwork::Gradients DenseNetwork::make_gradients() const {
    Gradients g;
    for (std::size_t l = 0; l < W_.size(); ++l) {
        g.dW.emplace_back(W_[l].rows, W_[l].cols);
        g.db.emplace_back(b_[l].size(), 0.0);
    }
    return g;
}

void DenseNetwork::Gradients::zero() {
    for (auto& m : dW) m.fill(0.0);
    for (auto& v : db) std::fill(v.begin(), v.end(), 0.0);
}

const Vec& DenseNetwork::forward(const Vec& x, double t, Workspace& ws) const {
    if (x.size() != cfg_.input_dim)
        throw ConfigError("network input dimension mismatch");
    const std::size_t L = W_.size();
    ws.pre.resize(L);
    ws.act.resize(L - 1);

    ws.input.resize(cfg_.first_layer_in());
    std::copy(x.begin(), x.end(), ws.input.begin());
    const Vec emb = time_embed(t, cfg_.time_embed_len);
    std::copy(emb.begin(), emb.end(), ws.input.begin() + cfg_.input_dim);

    const Vec* cur = &ws.input;
    for (std::size_t l = 0; l < L; ++l) {
        ws.pre[l].resize(W_[l].rows);
        kernels::matvec(W_[l].data.data(), cur->data(), b_[l].data(),
                        ws.pre[l].data(), W_[l].rows, W_[l].cols);
        if (l + 1 < L) {
            ws.act[l].resize(W_[l].rows);
            kernels::silu(ws.pre[l].data(), ws.act[l].data(), W_[l].rows);
            cur = &ws.act[l];
        }
    }
    return ws.pre.back();
}

void DenseNetwork::backward(Workspace& ws, const Vec& cotangent,
                            Gradients* grads, Vec* grad_x) const {
    const std::size_t L = W_.size();
    if (cotangent.size() != cfg_.output_dim)
        throw ConfigError("cotangent dimension mismatch");

    ws.gcur = cotangent;
    for (std::size_t li = L; li-- > 0;) {
        const Vec& layer_in = li == 0 ? ws.input : ws.act[li - 1];
        if (grads) {
            kernels::ger_acc(grads->dW[li].data.data(), ws.gcur.data(),
                             layer_in.data(), W_[li].rows, W_[li].cols);
            kernels::axpy(1.0, ws.gcur.data(), grads->db[li].data(),
                          ws.gcur.size());
        }
        const bool need_input_grad = li > 0 || grad_x != nullptr;
        if (!need_input_grad) break;
        ws.gnext.assign(W_[li].cols, 0.0);
        kernels::matvec_t_acc(W_[li].data.data(), ws.gcur.data(),
                              ws.gnext.data(), W_[li].rows, W_[li].cols);
        if (li > 0) {
            // Through the SiLU of the previous layer.
            ws.gcur.resize(ws.gnext.size());
            kernels::silu_bwd(ws.pre[li - 1].data(), ws.gnext.data(),
                              ws.gcur.data(), ws.gnext.size());
        } else if (grad_x) {
            grad_x->assign(ws.gnext.begin(),
                           ws.gnext.begin() + cfg_.input_dim);
        }
    }
}

Vec DenseNetwork::grad_input(const Vec& x, double t, const Vec& cotangent) const {
    Workspace ws;
    forward(x, t, ws);
    Vec gx;
    backward(ws, cotangent, nullptr, &gx);
    return gx;
}

AdamState AdamState::create(const DenseNetwork& net, double lr) {
    AdamState s;
    s.lr = lr;
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        s.m_w.emplace_back(net.weights()[l].rows, net.weights()[l].cols);
        s.v_w.emplace_back(net.weights()[l].rows, net.weights()[l].cols);
        s.m_b.emplace_back(net.biases()[l].size(), 0.0);
        s.v_b.emplace_back(net.biases()[l].size(), 0.0);
    }
    return s;
}

void adam_step(AdamState& s, DenseNetwork& net,
               const DenseNetwork::Gradients& grads) {
    ++s.step;
    const double bc1 = 1.0 - std::pow(s.beta1, s.step);
    const double bc2 = 1.0 - std::pow(s.beta2, s.step);
    auto update = [&](double* p, double* m, double* v, const double* g,
                      std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
            v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
        }
    };
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        update(net.weights()[l].data.data(), s.m_w[l].data.data(),
               s.v_w[l].data.data(), grads.dW[l].data.data(),
               net.weights()[l].data.size());
        update(net.biases()[l].data(), s.m_b[l].data(), s.v_b[l].data(),
               grads.db[l].data(), net.biases()[l].size());
    }
}

namespace {
constexpr char kMagic[12] = {'E', 'X', 'P', 'D', 'I', 'F',
                             'F', 'W', 'T', 'S', '0', '1'};
}

void save_network(const DenseNetwork& net, const std::string& path,
                  const std::string& meta_json) {
    json header;
    header["format"] = 1;
    header["endian"] = "little";
    header["input_dim"] = net.config().input_dim;
    header["time_embed_len"] = net.config().time_embed_len;
    header["hidden"] = net.config().hidden;
    header["output_dim"] = net.config().output_dim;
    header["meta"] = json::parse(meta_json);
    const std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open weight file for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        const auto& W = net.weights()[l];
        out.write(reinterpret_cast<const char*>(W.data.data()),
                  static_cast<std::streamsize>(W.data.size() * sizeof(double)));
        const auto& b = net.biases()[l];
        out.write(reinterpret_cast<const char*>(b.data()),
                  static_cast<std::streamsize>(b.size() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing weight file: " + path);
}

DenseNetwork load_network(const std::string& path, std::string* meta_json_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open weight file: " + path);
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("not a weight file (bad magic): " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw IoError("truncated weight file header: " + path);

    json header;
    try {
        header = json::parse(htext);
    } catch (const json::exception& e) {
        throw IoError("bad weight file header: " + std::string(e.what()));
    }
    NetConfig cfg;
    cfg.input_dim = header.at("input_dim").get<std::size_t>();
    cfg.time_embed_len = header.at("time_embed_len").get<std::size_t>();
    cfg.hidden = header.at("hidden").get<std::vector<std::size_t>>();
    cfg.output_dim = header.at("output_dim").get<std::size_t>();
    DenseNetwork net(cfg);
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        auto& W = net.weights()[l];
        in.read(reinterpret_cast<char*>(W.data.data()),
                static_cast<std::streamsize>(W.data.size() * sizeof(double)));
        auto& b = net.biases()[l];
        in.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(b.size() * sizeof(double)));
    }
    if (!in) throw IoError("truncated weight data: " + path);
    if (meta_json_out) *meta_json_out = header.at("meta").dump();
    return net;
}

}  // namespace expdiff

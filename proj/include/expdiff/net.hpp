#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expdiff/linalg.hpp"
#include "expdiff/rng.hpp"

// Small fully connected network with a sinusoidal time embedding and exact
// reverse-mode gradients with respect to both parameters and inputs. Used as
// the score network (output_dim = d) and the inference network (2d).
//
// Input layer consumes [x ; time_embed(t)]. Hidden layers use SiLU; the
// output layer is linear.

namespace expdiff {

// Interleaved (sin, cos) pairs with frequencies 10000^{-2k/len}; t is scaled
// by 1000 before embedding so the frequency ladder is exercised on [0, 1000].
Vec time_embed(double t, std::size_t len);

struct NetConfig {
    std::size_t input_dim = 1;
    std::size_t time_embed_len = 64;
    std::vector<std::size_t> hidden = {96, 96, 96, 96, 96, 96};
    std::size_t output_dim = 1;

    void validate() const;
    std::size_t first_layer_in() const { return input_dim + time_embed_len; }
};

class DenseNetwork {
public:
    DenseNetwork() = default;
    explicit DenseNetwork(const NetConfig& cfg);

    const NetConfig& config() const { return cfg_; }
    std::size_t num_layers() const { return W_.size(); }
    std::size_t param_count() const;

    // Kaiming-style fan-in uniform init, biases zero; deterministic per seed.
    void init(Rng& rng);

    // Caches everything backward() needs; reusable across calls.
    struct Workspace {
        Vec input;
        std::vector<Vec> pre;  // pre-activations, one per layer
        std::vector<Vec> act;  // SiLU outputs per hidden layer
        Vec gcur, gnext;       // backward scratch
    };

    struct Gradients {
        std::vector<Mat> dW;
        std::vector<Vec> db;
        void zero();
    };
    Gradients make_gradients() const;

    // Returns the output (owned by ws); deterministic.
    const Vec& forward(const Vec& x, double t, Workspace& ws) const;

    // Reverse pass from an output cotangent. Accumulates parameter gradients
    // into *grads when non-null; writes d(cotangent . output)/dx into *grad_x
    // (length input_dim) when non-null.
    void backward(Workspace& ws, const Vec& cotangent, Gradients* grads,
                  Vec* grad_x) const;

    // Convenience single-shot input gradient.
    Vec grad_input(const Vec& x, double t, const Vec& cotangent) const;

    std::vector<Mat>& weights() { return W_; }
    std::vector<Vec>& biases() { return b_; }
    const std::vector<Mat>& weights() const { return W_; }
    const std::vector<Vec>& biases() const { return b_; }

private:
    NetConfig cfg_;
    std::vector<Mat> W_;  // layer l: [out x in], row-major
    std::vector<Vec> b_;
};

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<Mat> m_w, v_w;
    std::vector<Vec> m_b, v_b;

    static AdamState create(const DenseNetwork& net, double lr);
};

void adam_step(AdamState& state, DenseNetwork& net,
               const DenseNetwork::Gradients& grads);

// Versioned little-endian binary with a JSON header; round-trips bit-exactly.
// `meta_json` is stored verbatim inside the header under "meta".
void save_network(const DenseNetwork& net, const std::string& path,
                  const std::string& meta_json = "{}");
DenseNetwork load_network(const std::string& path,
                          std::string* meta_json_out = nullptr);

}  // namespace expdiff

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "af/error.hpp"
#include "af/rng.hpp"
#include "af/tensor.hpp"

namespace af::encoder {

struct EncoderConfig {
    size_t num_layers = 2;
    size_t hidden_dim = 16;
    size_t num_heads = 2;
    size_t ffn_dim = 32;
    size_t vocab_size = 64;
    size_t max_seq_len = 32;
    double ln_eps = 1e-5;

    bool operator==(const EncoderConfig&) const = default;

    void validate() const {
        if (num_layers < 2) {
            throw ConfigError("num_layers must be >= 2 so front/back halves are non-trivial");
        }
        if (hidden_dim == 0 || num_heads == 0 || ffn_dim == 0 || vocab_size == 0 ||
            max_seq_len == 0) {
            throw ConfigError("all encoder dimensions must be positive");
        }
        if (hidden_dim % num_heads != 0) {
            throw ConfigError("hidden_dim " + std::to_string(hidden_dim) +
                              " not divisible by num_heads " + std::to_string(num_heads));
        }
        if (!(ln_eps > 0)) {
            throw ConfigError("ln_eps must be positive");
        }
    }
};

// Block ids: index 0 is the embedding block, 1..L the transformer layers.
inline std::string block_name(size_t index) {
    return index == 0 ? std::string("emb") : "layer_" + std::to_string(index);
}

template <typename T>
struct EncoderModel {
    EncoderConfig config;
    ParamStore<T> params;
    // Bumped on every applied train step; forward traces record it so a
    // stale trace cannot be replayed through backward.
    uint64_t revision = 0;
};

// Parameter names inside each block, in canonical (serialization) order.
inline const std::vector<std::string>& embedding_param_names() {
    static const std::vector<std::string> names = {"tok", "pos"};
    return names;
}
inline const std::vector<std::string>& layer_param_names() {
    static const std::vector<std::string> names = {
        "ln1_g", "ln1_b", "wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo",
        "ln2_g", "ln2_b", "w1", "b1", "w2", "b2",
    };
    return names;
}

template <typename T>
EncoderModel<T> init_model(const EncoderConfig& config, uint64_t seed) {
    config.validate();
    const size_t d = config.hidden_dim;
    const size_t f = config.ffn_dim;
    Rng rng(seed);

    auto scaled_uniform = [&](size_t rows, size_t cols) {
        Tensor<T> t = Tensor<T>::matrix(rows, cols);
        const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
        for (T& v : t.data) {
            v = static_cast<T>(rng.uniform(-a, a));
        }
        return t;
    };

    EncoderModel<T> model;
    model.config = config;
    model.params.add_block("emb");
    model.params.add("emb", "tok", scaled_uniform(config.vocab_size, d));
    model.params.add("emb", "pos", scaled_uniform(config.max_seq_len, d));

    for (size_t k = 1; k <= config.num_layers; ++k) {
        const std::string block = block_name(k);
        model.params.add_block(block);
        model.params.add(block, "ln1_g", Tensor<T>::vector(d, T(1)));
        model.params.add(block, "ln1_b", Tensor<T>::vector(d, T(0)));
        model.params.add(block, "wq", scaled_uniform(d, d));
        model.params.add(block, "bq", Tensor<T>::vector(d, T(0)));
        model.params.add(block, "wk", scaled_uniform(d, d));
        model.params.add(block, "bk", Tensor<T>::vector(d, T(0)));
        model.params.add(block, "wv", scaled_uniform(d, d));
        model.params.add(block, "bv", Tensor<T>::vector(d, T(0)));
        model.params.add(block, "wo", scaled_uniform(d, d));
        model.params.add(block, "bo", Tensor<T>::vector(d, T(0)));
        model.params.add(block, "ln2_g", Tensor<T>::vector(d, T(1)));
        model.params.add(block, "ln2_b", Tensor<T>::vector(d, T(0)));
        model.params.add(block, "w1", scaled_uniform(d, f));
        model.params.add(block, "b1", Tensor<T>::vector(f, T(0)));
        model.params.add(block, "w2", scaled_uniform(f, d));
        model.params.add(block, "b2", Tensor<T>::vector(d, T(0)));
    }
    return model;
}

// --- forward pass ----------------------------------------------------------

template <typename T>
struct LayerTrace {
    Tensor<T> ln1_xhat;
    std::vector<T> ln1_rstd;
    Tensor<T> q, k, v;               // post-projection, n x d
    std::vector<Tensor<T>> attn;     // per head, n x n softmax rows
    Tensor<T> attn_concat;           // n x d, heads concatenated before wo
    Tensor<T> x_mid;                 // residual stream after attention
    Tensor<T> ln2_xhat;
    std::vector<T> ln2_rstd;
    Tensor<T> ffn_pre;               // n x f, before activation
    Tensor<T> ffn_act;               // n x f, after activation
};

template <typename T>
struct ForwardTrace {
    std::vector<size_t> token_ids;
    // states[0] is the embedding output, states[k] the output of layer k.
    std::vector<Tensor<T>> states;
    std::vector<LayerTrace<T>> layers;
    uint64_t model_revision = 0;
    EncoderConfig config;
};

namespace detail {

template <typename T>
T gelu(T x) {
    return T(0.5) * x * (T(1) + static_cast<T>(std::erf(static_cast<double>(x) / std::numbers::sqrt2)));
}

template <typename T>
T gelu_grad(T x) {
    const double xd = static_cast<double>(x);
    const double cdf = 0.5 * (1.0 + std::erf(xd / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * xd * xd) / std::sqrt(2.0 * std::numbers::pi);
    return static_cast<T>(cdf + xd * pdf);
}

// y = g * (x - mean) / sqrt(var + eps) + b, rowwise; caches xhat and rstd.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& g, const Tensor<T>& b, double eps,
                     Tensor<T>& xhat_out, std::vector<T>& rstd_out) {
    const size_t n = x.rows(), d = x.cols();
    Tensor<T> y = Tensor<T>::matrix(n, d);
    xhat_out = Tensor<T>::matrix(n, d);
    rstd_out.assign(n, T(0));
    for (size_t i = 0; i < n; ++i) {
        T mean = T(0);
        for (size_t j = 0; j < d; ++j) {
            mean += x(i, j);
        }
        mean /= static_cast<T>(d);
        T var = T(0);
        for (size_t j = 0; j < d; ++j) {
            const T c = x(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<T>(d);
        const T rstd = T(1) / static_cast<T>(std::sqrt(static_cast<double>(var) + eps));
        rstd_out[i] = rstd;
        for (size_t j = 0; j < d; ++j) {
            const T xh = (x(i, j) - mean) * rstd;
            xhat_out(i, j) = xh;
            y(i, j) = g(j) * xh + b(j);
        }
    }
    return y;
}

// Rowwise layer-norm backward; accumulates into dg/db, returns dx.
template <typename T>
Tensor<T> layer_norm_backward(const Tensor<T>& dy, const Tensor<T>& xhat,
                              const std::vector<T>& rstd, const Tensor<T>& g, Tensor<T>& dg,
                              Tensor<T>& db) {
    const size_t n = dy.rows(), d = dy.cols();
    Tensor<T> dx = Tensor<T>::matrix(n, d);
    for (size_t i = 0; i < n; ++i) {
        T sum_dxhat = T(0);
        T sum_dxhat_xhat = T(0);
        for (size_t j = 0; j < d; ++j) {
            dg(j) += dy(i, j) * xhat(i, j);
            db(j) += dy(i, j);
            const T dxhat = dy(i, j) * g(j);
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat(i, j);
        }
        const T inv_d = T(1) / static_cast<T>(d);
        for (size_t j = 0; j < d; ++j) {
            const T dxhat = dy(i, j) * g(j);
            dx(i, j) = rstd[i] * (dxhat - sum_dxhat * inv_d - xhat(i, j) * sum_dxhat_xhat * inv_d);
        }
    }
    return dx;
}

// Rowwise softmax with max subtraction.
template <typename T>
void softmax_rows(Tensor<T>& m) {
    for (size_t i = 0; i < m.rows(); ++i) {
        T mx = m(i, 0);
        for (size_t j = 1; j < m.cols(); ++j) {
            mx = std::max(mx, m(i, j));
        }
        T sum = T(0);
        for (size_t j = 0; j < m.cols(); ++j) {
            const T e = static_cast<T>(std::exp(static_cast<double>(m(i, j) - mx)));
            m(i, j) = e;
            sum += e;
        }
        for (size_t j = 0; j < m.cols(); ++j) {
            m(i, j) /= sum;
        }
    }
}

template <typename T>
Tensor<T> colsum(const Tensor<T>& m) {
    Tensor<T> out = Tensor<T>::vector(m.cols());
    for (size_t i = 0; i < m.rows(); ++i) {
        for (size_t j = 0; j < m.cols(); ++j) {
            out(j) += m(i, j);
        }
    }
    return out;
}

} // namespace detail

template <typename T>
ForwardTrace<T> forward(const EncoderModel<T>& model, const std::vector<size_t>& token_ids) {
    const EncoderConfig& cfg = model.config;
    const size_t n = token_ids.size();
    if (n == 0 || n > cfg.max_seq_len) {
        throw InputError("sequence length " + std::to_string(n) + " outside (0, " +
                         std::to_string(cfg.max_seq_len) + "]");
    }
    for (const size_t id : token_ids) {
        if (id >= cfg.vocab_size) {
            throw InputError("token id " + std::to_string(id) + " >= vocab_size " +
                             std::to_string(cfg.vocab_size));
        }
    }

    const size_t d = cfg.hidden_dim;
    const size_t heads = cfg.num_heads;
    const size_t hd = d / heads;
    const T scale = T(1) / static_cast<T>(std::sqrt(static_cast<double>(hd)));

    ForwardTrace<T> trace;
    trace.token_ids = token_ids;
    trace.model_revision = model.revision;
    trace.config = cfg;
    trace.states.reserve(cfg.num_layers + 1);
    trace.layers.resize(cfg.num_layers);

    const Tensor<T>& tok = model.params.at("emb", "tok");
    const Tensor<T>& pos = model.params.at("emb", "pos");
    Tensor<T> x = Tensor<T>::matrix(n, d);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < d; ++j) {
            x(i, j) = tok(token_ids[i], j) + pos(i, j);
        }
    }
    trace.states.push_back(x);

    for (size_t k = 1; k <= cfg.num_layers; ++k) {
        const std::string block = block_name(k);
        LayerTrace<T>& lt = trace.layers[k - 1];

        const Tensor<T> n1 =
            detail::layer_norm(x, model.params.at(block, "ln1_g"), model.params.at(block, "ln1_b"),
                               cfg.ln_eps, lt.ln1_xhat, lt.ln1_rstd);

        lt.q = matmul(n1, model.params.at(block, "wq"));
        add_row_vector(lt.q, model.params.at(block, "bq"));
        lt.k = matmul(n1, model.params.at(block, "wk"));
        add_row_vector(lt.k, model.params.at(block, "bk"));
        lt.v = matmul(n1, model.params.at(block, "wv"));
        add_row_vector(lt.v, model.params.at(block, "bv"));

        lt.attn.assign(heads, Tensor<T>());
        lt.attn_concat = Tensor<T>::matrix(n, d);
        for (size_t h = 0; h < heads; ++h) {
            const size_t c0 = h * hd;
            Tensor<T> scores = Tensor<T>::matrix(n, n);
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = 0; j < n; ++j) {
                    T acc = T(0);
                    for (size_t c = 0; c < hd; ++c) {
                        acc += lt.q(i, c0 + c) * lt.k(j, c0 + c);
                    }
                    scores(i, j) = acc * scale;
                }
            }
            detail::softmax_rows(scores);
            for (size_t i = 0; i < n; ++i) {
                for (size_t c = 0; c < hd; ++c) {
                    T acc = T(0);
                    for (size_t j = 0; j < n; ++j) {
                        acc += scores(i, j) * lt.v(j, c0 + c);
                    }
                    lt.attn_concat(i, c0 + c) = acc;
                }
            }
            lt.attn[h] = std::move(scores);
        }

        Tensor<T> attn_out = matmul(lt.attn_concat, model.params.at(block, "wo"));
        add_row_vector(attn_out, model.params.at(block, "bo"));

        lt.x_mid = x;
        add_inplace(lt.x_mid, attn_out);

        const Tensor<T> n2 = detail::layer_norm(lt.x_mid, model.params.at(block, "ln2_g"),
                                                model.params.at(block, "ln2_b"), cfg.ln_eps,
                                                lt.ln2_xhat, lt.ln2_rstd);

        lt.ffn_pre = matmul(n2, model.params.at(block, "w1"));
        add_row_vector(lt.ffn_pre, model.params.at(block, "b1"));
        lt.ffn_act = lt.ffn_pre;
        for (T& v : lt.ffn_act.data) {
            v = detail::gelu(v);
        }
        Tensor<T> ffn_out = matmul(lt.ffn_act, model.params.at(block, "w2"));
        add_row_vector(ffn_out, model.params.at(block, "b2"));

        x = lt.x_mid;
        add_inplace(x, ffn_out);
        trace.states.push_back(x);
    }
    return trace;
}

// Convenience: hidden states only.
template <typename T>
std::vector<Tensor<T>> hidden_states(const EncoderModel<T>& model,
                                     const std::vector<size_t>& token_ids) {
    return forward(model, token_ids).states;
}

// --- backward pass ---------------------------------------------------------

// Upstream gradients on hidden states, keyed by block index (0 = embedding
// output, k = output of layer k); each value is an n x d matrix.
template <typename T>
using UpstreamGrads = std::map<size_t, Tensor<T>>;

template <typename T>
ParamStore<T> backward(const EncoderModel<T>& model, const ForwardTrace<T>& trace,
                       const UpstreamGrads<T>& upstream) {
    const EncoderConfig& cfg = model.config;
    if (trace.model_revision != model.revision || !(trace.config == cfg)) {
        throw StateError("forward trace does not match the current model state");
    }
    const size_t n = trace.token_ids.size();
    const size_t d = cfg.hidden_dim;
    const size_t heads = cfg.num_heads;
    const size_t hd = d / heads;
    const T scale = T(1) / static_cast<T>(std::sqrt(static_cast<double>(hd)));

    for (const auto& [block, grad] : upstream) {
        if (block > cfg.num_layers) {
            throw GradientError("upstream gradient for unknown block index " +
                                std::to_string(block));
        }
        if (grad.rows() != n || grad.cols() != d) {
            throw GradientError("upstream gradient shape mismatch at block " +
                                std::to_string(block));
        }
    }

    ParamStore<T> grads = model.params.zeros_like();
    Tensor<T> dx = Tensor<T>::matrix(n, d);

    for (size_t k = cfg.num_layers; k >= 1; --k) {
        if (auto it = upstream.find(k); it != upstream.end()) {
            add_inplace(dx, it->second);
        }
        const std::string block = block_name(k);
        const LayerTrace<T>& lt = trace.layers[k - 1];

        // FFN path: x_k = x_mid + gelu(ln2(x_mid) w1 + b1) w2 + b2
        Tensor<T> d_act = matmul_a_bt(dx, model.params.at(block, "w2"));
        grads.at(block, "w2") = matmul_at_b(lt.ffn_act, dx);
        grads.at(block, "b2") = detail::colsum(dx);
        Tensor<T> d_pre = d_act;
        for (size_t i = 0; i < d_pre.data.size(); ++i) {
            d_pre.data[i] *= detail::gelu_grad(lt.ffn_pre.data[i]);
        }
        Tensor<T> n2 = lt.ln2_xhat; // reconstruct ln2 output for the w1 grad
        {
            const Tensor<T>& g2 = model.params.at(block, "ln2_g");
            const Tensor<T>& b2v = model.params.at(block, "ln2_b");
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = 0; j < d; ++j) {
                    n2(i, j) = g2(j) * lt.ln2_xhat(i, j) + b2v(j);
                }
            }
        }
        grads.at(block, "w1") = matmul_at_b(n2, d_pre);
        grads.at(block, "b1") = detail::colsum(d_pre);
        Tensor<T> d_n2 = matmul_a_bt(d_pre, model.params.at(block, "w1"));
        Tensor<T> d_x_mid =
            detail::layer_norm_backward(d_n2, lt.ln2_xhat, lt.ln2_rstd,
                                        model.params.at(block, "ln2_g"), grads.at(block, "ln2_g"),
                                        grads.at(block, "ln2_b"));
        add_inplace(d_x_mid, dx); // residual connection

        // attention output projection
        Tensor<T> d_concat = matmul_a_bt(d_x_mid, model.params.at(block, "wo"));
        grads.at(block, "wo") = matmul_at_b(lt.attn_concat, d_x_mid);
        grads.at(block, "bo") = detail::colsum(d_x_mid);

        Tensor<T> dq = Tensor<T>::matrix(n, d);
        Tensor<T> dk = Tensor<T>::matrix(n, d);
        Tensor<T> dv = Tensor<T>::matrix(n, d);
        for (size_t h = 0; h < heads; ++h) {
            const size_t c0 = h * hd;
            const Tensor<T>& a = lt.attn[h];
            // dV_h = A^T dO_h ; dA = dO_h V_h^T
            Tensor<T> da = Tensor<T>::matrix(n, n);
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = 0; j < n; ++j) {
                    T acc = T(0);
                    for (size_t c = 0; c < hd; ++c) {
                        acc += d_concat(i, c0 + c) * lt.v(j, c0 + c);
                    }
                    da(i, j) = acc;
                }
            }
            for (size_t j = 0; j < n; ++j) {
                for (size_t c = 0; c < hd; ++c) {
                    T acc = T(0);
                    for (size_t i = 0; i < n; ++i) {
                        acc += a(i, j) * d_concat(i, c0 + c);
                    }
                    dv(j, c0 + c) = acc;
                }
            }
            // softmax backward, then scores -> q, k
            for (size_t i = 0; i < n; ++i) {
                T dot = T(0);
                for (size_t j = 0; j < n; ++j) {
                    dot += da(i, j) * a(i, j);
                }
                for (size_t j = 0; j < n; ++j) {
                    da(i, j) = a(i, j) * (da(i, j) - dot);
                }
            }
            for (size_t i = 0; i < n; ++i) {
                for (size_t c = 0; c < hd; ++c) {
                    T acc_q = T(0);
                    for (size_t j = 0; j < n; ++j) {
                        acc_q += da(i, j) * lt.k(j, c0 + c);
                    }
                    dq(i, c0 + c) = acc_q * scale;
                }
            }
            for (size_t j = 0; j < n; ++j) {
                for (size_t c = 0; c < hd; ++c) {
                    T acc_k = T(0);
                    for (size_t i = 0; i < n; ++i) {
                        acc_k += da(i, j) * lt.q(i, c0 + c);
                    }
                    dk(j, c0 + c) = acc_k * scale;
                }
            }
        }

        // back through the q/k/v projections into ln1
        Tensor<T> n1 = lt.ln1_xhat;
        {
            const Tensor<T>& g1 = model.params.at(block, "ln1_g");
            const Tensor<T>& b1v = model.params.at(block, "ln1_b");
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = 0; j < d; ++j) {
                    n1(i, j) = g1(j) * lt.ln1_xhat(i, j) + b1v(j);
                }
            }
        }
        grads.at(block, "wq") = matmul_at_b(n1, dq);
        grads.at(block, "bq") = detail::colsum(dq);
        grads.at(block, "wk") = matmul_at_b(n1, dk);
        grads.at(block, "bk") = detail::colsum(dk);
        grads.at(block, "wv") = matmul_at_b(n1, dv);
        grads.at(block, "bv") = detail::colsum(dv);

        Tensor<T> d_n1 = matmul_a_bt(dq, model.params.at(block, "wq"));
        add_inplace(d_n1, matmul_a_bt(dk, model.params.at(block, "wk")));
        add_inplace(d_n1, matmul_a_bt(dv, model.params.at(block, "wv")));

        Tensor<T> d_x_in =
            detail::layer_norm_backward(d_n1, lt.ln1_xhat, lt.ln1_rstd,
                                        model.params.at(block, "ln1_g"), grads.at(block, "ln1_g"),
                                        grads.at(block, "ln1_b"));
        add_inplace(d_x_in, d_x_mid); // residual connection
        dx = std::move(d_x_in);
    }

    if (auto it = upstream.find(0); it != upstream.end()) {
        add_inplace(dx, it->second);
    }
    Tensor<T>& d_tok = grads.at("emb", "tok");
    Tensor<T>& d_pos = grads.at("emb", "pos");
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < d; ++j) {
            d_tok(trace.token_ids[i], j) += dx(i, j);
            d_pos(i, j) += dx(i, j);
        }
    }
    return grads;
}

// --- freezing --------------------------------------------------------------

struct FreezeMask {
    std::set<std::string> frozen_blocks;

    bool is_frozen(const std::string& block) const { return frozen_blocks.count(block) > 0; }
    bool empty() const { return frozen_blocks.empty(); }
};

struct FreezeStrategy {
    enum class Kind {
        Full,      // no freezing
        FrontHalf, // freeze emb + layers 1..floor(L/2)
        BackHalf,  // freeze layers floor(L/2)+1..L
        RealignOnly, // freeze everything except block k
        FreezeOnly,  // freeze only block k
    };

    Kind kind = Kind::Full;
    size_t block = 0; // block index for RealignOnly / FreezeOnly (0 = emb)

    static FreezeStrategy full() { return {Kind::Full, 0}; }
    static FreezeStrategy front_half() { return {Kind::FrontHalf, 0}; }
    static FreezeStrategy back_half() { return {Kind::BackHalf, 0}; }
    static FreezeStrategy realign_only(size_t k) { return {Kind::RealignOnly, k}; }
    static FreezeStrategy freeze_only(size_t k) { return {Kind::FreezeOnly, k}; }

    bool operator==(const FreezeStrategy&) const = default;
};

std::string to_string(const FreezeStrategy& s);
FreezeStrategy freeze_strategy_from_string(const std::string& s); // throws StrategyError

FreezeMask apply_freeze(const FreezeStrategy& strategy, size_t num_layers);

// --- serialization ---------------------------------------------------------

template <typename T>
const char* dtype_name();
template <>
inline const char* dtype_name<float>() {
    return "f32";
}
template <>
inline const char* dtype_name<double>() {
    return "f64";
}

// Raw little-endian bytes of every tensor in a block, in canonical order.
// Used by the freeze bit-exactness checks.
template <typename T>
std::string serialize_block(const EncoderModel<T>& model, const std::string& block) {
    std::string bytes;
    for (const auto& b : model.params.blocks()) {
        if (b.id != block) {
            continue;
        }
        for (const auto& e : b.entries) {
            const size_t nbytes = e.tensor.data.size() * sizeof(T);
            const size_t off = bytes.size();
            bytes.resize(off + nbytes);
            std::memcpy(bytes.data() + off, e.tensor.data.data(), nbytes);
        }
        return bytes;
    }
    throw ConfigError("serialize_block: unknown block " + block);
}

void save_model_file(const std::string& path, const EncoderModel<float>& model);
void save_model_file(const std::string& path, const EncoderModel<double>& model);

template <typename T>
EncoderModel<T> load_model_file(const std::string& path);

} // namespace af::encoder

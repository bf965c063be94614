#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "af/align.hpp"
#include "af/error.hpp"
#include "af/tensor.hpp"

namespace af::realign {

// Loss evaluations since process start (or the last reset). Lets experiment
// code assert that fine-tune-only runs never touch the realignment loss.
uint64_t loss_eval_count();
void reset_loss_eval_count();
void bump_loss_eval_count();

struct LossConfig {
    double temperature = 0.1;
    // Block index whose hidden states feed the batch; -1 selects the last
    // layer. Similarity is cosine.
    int representation_layer = -1;

    size_t resolve_layer(size_t num_layers) const {
        if (representation_layer < 0) {
            return num_layers;
        }
        const size_t k = static_cast<size_t>(representation_layer);
        if (k > num_layers) {
            throw ConfigError("representation_layer " + std::to_string(k) +
                              " out of range 0.." + std::to_string(num_layers));
        }
        return k;
    }

    void validate() const {
        if (!(temperature > 0)) {
            throw ConfigError("temperature must be positive");
        }
    }
};

// The 2B word representations of B aligned pairs, with the fixpoint-free
// involution pairing each representation with its translation.
template <typename T>
struct RealignBatch {
    Tensor<T> reps;               // 2B x d
    std::vector<size_t> partner;  // partner[partner[i]] == i, partner[i] != i
    size_t pair_count = 0;        // B

    // Appends one aligned pair; returns the index of the source row.
    size_t add_pair(const std::vector<T>& src_rep, const std::vector<T>& tgt_rep) {
        const size_t d = src_rep.size();
        if (reps.numel() == 0) {
            reps = Tensor<T>::matrix(0, d);
            reps.shape = {0, d};
        }
        if (tgt_rep.size() != d || reps.cols() != d) {
            throw BatchError("representation dimension mismatch");
        }
        const size_t i = reps.rows();
        reps.shape[0] += 2;
        reps.data.insert(reps.data.end(), src_rep.begin(), src_rep.end());
        reps.data.insert(reps.data.end(), tgt_rep.begin(), tgt_rep.end());
        partner.push_back(i + 1);
        partner.push_back(i);
        ++pair_count;
        return i;
    }

    void validate() const {
        const size_t n = reps.rows();
        if (pair_count == 0 || n != 2 * pair_count) {
            throw BatchError("batch must hold 2B representations for B >= 1 pairs");
        }
        if (partner.size() != n) {
            throw BatchError("partner map size mismatch");
        }
        for (size_t i = 0; i < n; ++i) {
            if (partner[i] >= n || partner[i] == i || partner[partner[i]] != i) {
                throw BatchError("partner map is not a fixpoint-free involution");
            }
        }
        if (!reps.all_finite()) {
            throw NumericError("non-finite representation in batch");
        }
    }
};

template <typename T>
T cosine_sim(const std::vector<T>& u, const std::vector<T>& v) {
    if (u.size() != v.size()) {
        throw DimensionError("cosine_sim: dimension mismatch");
    }
    T dot = T(0), nu = T(0), nv = T(0);
    for (size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == T(0) || nv == T(0)) {
        throw NumericError("cosine_sim: zero-norm input");
    }
    return dot / static_cast<T>(std::sqrt(static_cast<double>(nu)) *
                                std::sqrt(static_cast<double>(nv)));
}

template <typename T>
struct LossResult {
    T loss = T(0);
    Tensor<T> rep_grads; // 2B x d, d loss / d reps
};

// In-batch contrastive realignment objective. For every representation h the
// per-term log-ratio uses the aligned partner in the numerator and all other
// batch members (partner included) in the denominator; terms are averaged
// with prefactor 1/(2B). The printed objective is a maximization, so the
// returned loss is its negation, with exact gradients w.r.t. the reps.
template <typename T>
LossResult<T> contrastive_loss(const RealignBatch<T>& batch, const LossConfig& cfg) {
    cfg.validate();
    batch.validate();
    bump_loss_eval_count();

    const size_t n = batch.reps.rows();
    const size_t d = batch.reps.cols();
    const T temp = static_cast<T>(cfg.temperature);

    std::vector<T> norm(n);
    for (size_t i = 0; i < n; ++i) {
        T acc = T(0);
        for (size_t j = 0; j < d; ++j) {
            acc += batch.reps(i, j) * batch.reps(i, j);
        }
        if (acc == T(0)) {
            throw NumericError("zero-norm representation at row " + std::to_string(i));
        }
        norm[i] = static_cast<T>(std::sqrt(static_cast<double>(acc)));
    }

    Tensor<T> cos = Tensor<T>::matrix(n, n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            T dot = T(0);
            for (size_t c = 0; c < d; ++c) {
                dot += batch.reps(i, c) * batch.reps(j, c);
            }
            const T cs = dot / (norm[i] * norm[j]);
            cos(i, j) = cs;
            cos(j, i) = cs;
        }
    }

    // scaled similarities, rowwise logsumexp over j != i with max subtraction
    const T inv_n = T(1) / static_cast<T>(n);
    T loss = T(0);
    Tensor<T> d_scaled = Tensor<T>::matrix(n, n); // d loss / d (cos/T)
    for (size_t i = 0; i < n; ++i) {
        T row_max = -std::numeric_limits<T>::infinity();
        for (size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            row_max = std::max(row_max, cos(i, j) / temp);
        }
        T denom = T(0);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            denom += static_cast<T>(std::exp(static_cast<double>(cos(i, j) / temp - row_max)));
        }
        const T lse = row_max + static_cast<T>(std::log(static_cast<double>(denom)));
        loss -= inv_n * (cos(i, batch.partner[i]) / temp - lse);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const T p =
                static_cast<T>(std::exp(static_cast<double>(cos(i, j) / temp - lse)));
            T g = inv_n * p;
            if (j == batch.partner[i]) {
                g -= inv_n;
            }
            d_scaled(i, j) = g;
        }
    }
    if (!std::isfinite(static_cast<double>(loss))) {
        throw NumericError("non-finite contrastive loss");
    }

    LossResult<T> result;
    result.loss = loss;
    result.rep_grads = Tensor<T>::matrix(n, d);
    const T inv_temp = T(1) / temp;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const T dcos = (d_scaled(i, j) + d_scaled(j, i)) * inv_temp;
            if (dcos == T(0)) {
                continue;
            }
            const T inv_ninj = T(1) / (norm[i] * norm[j]);
            const T ci = cos(i, j) / (norm[i] * norm[i]);
            const T cj = cos(i, j) / (norm[j] * norm[j]);
            for (size_t c = 0; c < d; ++c) {
                result.rep_grads(i, c) += dcos * (batch.reps(j, c) * inv_ninj - ci * batch.reps(i, c));
                result.rep_grads(j, c) += dcos * (batch.reps(i, c) * inv_ninj - cj * batch.reps(j, c));
            }
        }
    }
    if (!result.rep_grads.all_finite()) {
        throw NumericError("non-finite gradient in contrastive loss");
    }
    return result;
}

// Builds a batch from the hidden states of one sentence pair. Spans map each
// token index to the hidden rows pooled for it (singlatons by default).
template <typename T>
RealignBatch<T> build_batch(const Tensor<T>& hidden_src, const Tensor<T>& hidden_tgt,
                            const align::AlignmentSet& links,
                            const std::vector<std::vector<size_t>>& src_spans,
                            const std::vector<std::vector<size_t>>& tgt_spans,
                            align::Pooling pooling) {
    if (links.links.empty()) {
        throw BatchError("cannot build a realignment batch from zero links");
    }
    RealignBatch<T> batch;
    const size_t d = hidden_src.cols();
    for (const align::AlignmentLink& l : links.links) {
        if (l.s >= src_spans.size() || l.t >= tgt_spans.size()) {
            throw SpanError("link (" + std::to_string(l.s) + "," + std::to_string(l.t) +
                            ") has no span");
        }
        const Tensor<T> sv =
            align::select_word_reps(hidden_src, {src_spans[l.s]}, pooling);
        const Tensor<T> tv =
            align::select_word_reps(hidden_tgt, {tgt_spans[l.t]}, pooling);
        std::vector<T> srow(sv.data.begin(), sv.data.begin() + d);
        std::vector<T> trow(tv.data.begin(), tv.data.begin() + d);
        batch.add_pair(srow, trow);
    }
    return batch;
}

inline std::vector<std::vector<size_t>> singleton_spans(size_t len) {
    std::vector<std::vector<size_t>> spans(len);
    for (size_t i = 0; i < len; ++i) {
        spans[i] = {i};
    }
    return spans;
}

// Singleton-span convenience overload.
template <typename T>
RealignBatch<T> build_batch(const Tensor<T>& hidden_src, const Tensor<T>& hidden_tgt,
                            const align::AlignmentSet& links, align::Pooling pooling) {
    return build_batch(hidden_src, hidden_tgt, links, singleton_spans(hidden_src.rows()),
                       singleton_spans(hidden_tgt.rows()), pooling);
}

} // namespace af::realign

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "af/error.hpp"
#include "af/rng.hpp"
#include "af/tensor.hpp"

namespace af::pipeline {

enum class TaskKind {
    TokenClassifier,
    SentenceClassifier,
};

TaskKind task_kind_from_string(const std::string& s);
std::string to_string(TaskKind k);

// Linear classifier over encoder states: one logit row per position for the
// token task, one per sentence (mean-pooled final states) for the sentence
// task.
template <typename T>
struct TaskHead {
    TaskKind kind = TaskKind::TokenClassifier;
    size_t num_labels = 0;
    ParamStore<T> params; // block "head": weight (d x K), bias (K)

    static TaskHead init(TaskKind kind, size_t hidden_dim, size_t num_labels, uint64_t seed) {
        if (hidden_dim == 0 || num_labels == 0) {
            throw ConfigError("task head needs positive hidden_dim and label count");
        }
        TaskHead head;
        head.kind = kind;
        head.num_labels = num_labels;
        Rng rng(seed);
        Tensor<T> w = Tensor<T>::matrix(hidden_dim, num_labels);
        const double a = std::sqrt(6.0 / static_cast<double>(hidden_dim + num_labels));
        for (T& v : w.data) {
            v = static_cast<T>(rng.uniform(-a, a));
        }
        head.params.add_block("head");
        head.params.add("head", "weight", std::move(w));
        head.params.add("head", "bias", Tensor<T>::vector(num_labels, T(0)));
        return head;
    }

    const Tensor<T>& weight() const { return params.at("head", "weight"); }
    const Tensor<T>& bias() const { return params.at("head", "bias"); }
    Tensor<T>& weight() { return params.at("head", "weight"); }
    Tensor<T>& bias() { return params.at("head", "bias"); }
};

template <typename T>
Tensor<T> token_logits(const TaskHead<T>& head, const Tensor<T>& hidden) {
    Tensor<T> logits = matmul(hidden, head.weight());
    add_row_vector(logits, head.bias());
    return logits;
}

template <typename T>
Tensor<T> mean_pool_rows(const Tensor<T>& hidden) {
    Tensor<T> pooled = Tensor<T>::matrix(1, hidden.cols());
    for (size_t i = 0; i < hidden.rows(); ++i) {
        for (size_t j = 0; j < hidden.cols(); ++j) {
            pooled(0, j) += hidden(i, j);
        }
    }
    const T inv = T(1) / static_cast<T>(hidden.rows());
    for (T& v : pooled.data) {
        v *= inv;
    }
    return pooled;
}

template <typename T>
Tensor<T> sentence_logits(const TaskHead<T>& head, const Tensor<T>& hidden) {
    Tensor<T> logits = matmul(mean_pool_rows(hidden), head.weight());
    add_row_vector(logits, head.bias());
    return logits;
}

// Cross-entropy forward+backward for one sentence. Losses and gradients are
// sums; the caller normalizes over the batch before the optimizer step.
template <typename T>
struct HeadBackward {
    T loss_sum = T(0);
    size_t unit_count = 0; // tokens (token task) or 1 (sentence task)
    size_t correct = 0;
    Tensor<T> d_hidden;      // n x d
    ParamStore<T> head_grads;
};

namespace detail {

// Softmax cross-entropy on one logit row; returns the loss and writes
// (p - onehot) into dlogits.
template <typename T>
T ce_row(const Tensor<T>& logits, size_t row, size_t label, Tensor<T>& dlogits, bool& correct) {
    const size_t k = logits.cols();
    T mx = logits(row, 0);
    size_t arg = 0;
    for (size_t j = 1; j < k; ++j) {
        if (logits(row, j) > mx) {
            mx = logits(row, j);
            arg = j;
        }
    }
    correct = arg == label;
    T denom = T(0);
    for (size_t j = 0; j < k; ++j) {
        denom += static_cast<T>(std::exp(static_cast<double>(logits(row, j) - mx)));
    }
    const T lse = mx + static_cast<T>(std::log(static_cast<double>(denom)));
    for (size_t j = 0; j < k; ++j) {
        dlogits(row, j) = static_cast<T>(std::exp(static_cast<double>(logits(row, j) - lse)));
    }
    dlogits(row, label) -= T(1);
    return lse - logits(row, label);
}

} // namespace detail

template <typename T>
HeadBackward<T> token_ce_backward(const TaskHead<T>& head, const Tensor<T>& hidden,
                                  const std::vector<size_t>& labels) {
    if (labels.size() != hidden.rows()) {
        throw DataError("token label count does not match sequence length");
    }
    for (const size_t l : labels) {
        if (l >= head.num_labels) {
            throw DataError("label " + std::to_string(l) + " out of range for K=" +
                            std::to_string(head.num_labels));
        }
    }
    const Tensor<T> logits = token_logits(head, hidden);
    Tensor<T> dlogits = logits.zeros_like();
    HeadBackward<T> out;
    for (size_t i = 0; i < hidden.rows(); ++i) {
        bool correct = false;
        out.loss_sum += detail::ce_row(logits, i, labels[i], dlogits, correct);
        out.correct += correct ? 1 : 0;
    }
    out.unit_count = hidden.rows();
    out.d_hidden = matmul_a_bt(dlogits, head.weight());
    out.head_grads = head.params.zeros_like();
    out.head_grads.at("head", "weight") = matmul_at_b(hidden, dlogits);
    out.head_grads.at("head", "bias") = [&] {
        Tensor<T> b = Tensor<T>::vector(head.num_labels);
        for (size_t i = 0; i < dlogits.rows(); ++i) {
            for (size_t j = 0; j < dlogits.cols(); ++j) {
                b(j) += dlogits(i, j);
            }
        }
        return b;
    }();
    return out;
}

template <typename T>
HeadBackward<T> sentence_ce_backward(const TaskHead<T>& head, const Tensor<T>& hidden,
                                     size_t label) {
    if (label >= head.num_labels) {
        throw DataError("label " + std::to_string(label) + " out of range for K=" +
                        std::to_string(head.num_labels));
    }
    const Tensor<T> pooled = mean_pool_rows(hidden);
    Tensor<T> logits = matmul(pooled, head.weight());
    add_row_vector(logits, head.bias());

    Tensor<T> dlogits = logits.zeros_like();
    HeadBackward<T> out;
    bool correct = false;
    out.loss_sum = detail::ce_row(logits, 0, label, dlogits, correct);
    out.correct = correct ? 1 : 0;
    out.unit_count = 1;

    const Tensor<T> d_pooled = matmul_a_bt(dlogits, head.weight()); // 1 x d
    out.d_hidden = Tensor<T>::matrix(hidden.rows(), hidden.cols());
    const T inv = T(1) / static_cast<T>(hidden.rows());
    for (size_t i = 0; i < hidden.rows(); ++i) {
        for (size_t j = 0; j < hidden.cols(); ++j) {
            out.d_hidden(i, j) = d_pooled(0, j) * inv;
        }
    }
    out.head_grads = head.params.zeros_like();
    out.head_grads.at("head", "weight") = matmul_at_b(pooled, dlogits);
    out.head_grads.at("head", "bias") = [&] {
        Tensor<T> b = Tensor<T>::vector(head.num_labels);
        for (size_t j = 0; j < dlogits.cols(); ++j) {
            b(j) = dlogits(0, j);
        }
        return b;
    }();
    return out;
}

} // namespace af::pipeline

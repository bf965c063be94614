#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "af/error.hpp"

namespace af {

// Dense row-major tensor. Rank 1 or 2 is all the encoder needs.
template <typename T>
struct Tensor {
    std::vector<size_t> shape;
    std::vector<T> data;

    Tensor() = default;

    static Tensor vector(size_t n, T fill = T(0)) {
        return Tensor{{n}, std::vector<T>(n, fill)};
    }

    static Tensor matrix(size_t rows, size_t cols, T fill = T(0)) {
        return Tensor{{rows, cols}, std::vector<T>(rows * cols, fill)};
    }

    size_t numel() const { return data.size(); }
    size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    T& operator()(size_t i) { return data[i]; }
    const T& operator()(size_t i) const { return data[i]; }
    T& operator()(size_t i, size_t j) { return data[i * cols() + j]; }
    const T& operator()(size_t i, size_t j) const { return data[i * cols() + j]; }

    Tensor zeros_like() const {
        return Tensor{shape, std::vector<T>(data.size(), T(0))};
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    bool all_finite() const {
        for (const T v : data) {
            if (!std::isfinite(static_cast<double>(v))) {
                return false;
            }
        }
        return true;
    }
};

// C = A * B, A is n x m, B is m x k.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    const size_t n = a.rows(), m = a.cols(), k = b.cols();
    Tensor<T> c = Tensor<T>::matrix(n, k);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < m; ++j) {
            const T aij = a(i, j);
            if (aij == T(0)) {
                continue;
            }
            for (size_t l = 0; l < k; ++l) {
                c(i, l) += aij * b(j, l);
            }
        }
    }
    return c;
}

// C = A^T * B, A is n x m, B is n x k, C is m x k.
template <typename T>
Tensor<T> matmul_at_b(const Tensor<T>& a, const Tensor<T>& b) {
    const size_t n = a.rows(), m = a.cols(), k = b.cols();
    Tensor<T> c = Tensor<T>::matrix(m, k);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < m; ++j) {
            const T aij = a(i, j);
            if (aij == T(0)) {
                continue;
            }
            for (size_t l = 0; l < k; ++l) {
                c(j, l) += aij * b(i, l);
            }
        }
    }
    return c;
}

// C = A * B^T, A is n x m, B is k x m, C is n x k.
template <typename T>
Tensor<T> matmul_a_bt(const Tensor<T>& a, const Tensor<T>& b) {
    const size_t n = a.rows(), m = a.cols(), k = b.rows();
    Tensor<T> c = Tensor<T>::matrix(n, k);
    for (size_t i = 0; i < n; ++i) {
        for (size_t l = 0; l < k; ++l) {
            T acc = T(0);
            for (size_t j = 0; j < m; ++j) {
                acc += a(i, j) * b(l, j);
            }
            c(i, l) = acc;
        }
    }
    return c;
}

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("add_inplace: shape mismatch");
    }
    for (size_t i = 0; i < a.data.size(); ++i) {
        a.data[i] += b.data[i];
    }
}

// Adds a length-k row vector to every row of an n x k matrix.
template <typename T>
void add_row_vector(Tensor<T>& m, const Tensor<T>& v) {
    for (size_t i = 0; i < m.rows(); ++i) {
        for (size_t j = 0; j < m.cols(); ++j) {
            m(i, j) += v(j);
        }
    }
}

// Named parameter (or gradient) store. Blocks keep their construction order,
// which doubles as the canonical serialization order: `emb` first, then
// `layer_1` .. `layer_L` (and `head` for task heads).
template <typename T>
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor<T> tensor;
    };

    struct Block {
        std::string id;
        std::vector<Entry> entries;
    };

    void add_block(const std::string& id) {
        if (block_index_.count(id)) {
            throw ConfigError("duplicate block id: " + id);
        }
        block_index_[id] = blocks_.size();
        blocks_.push_back(Block{id, {}});
    }

    void add(const std::string& block, const std::string& name, Tensor<T> t) {
        blocks_[index_of(block)].entries.push_back(Entry{name, std::move(t)});
    }

    bool has_block(const std::string& id) const { return block_index_.count(id) > 0; }

    Tensor<T>& at(const std::string& block, const std::string& name) {
        return const_cast<Tensor<T>&>(std::as_const(*this).at(block, name));
    }

    const Tensor<T>& at(const std::string& block, const std::string& name) const {
        const Block& b = blocks_[index_of(block)];
        for (const Entry& e : b.entries) {
            if (e.name == name) {
                return e.tensor;
            }
        }
        throw ConfigError("unknown parameter " + block + "." + name);
    }

    const std::vector<Block>& blocks() const { return blocks_; }
    std::vector<Block>& blocks() { return blocks_; }

    std::vector<std::string> block_ids() const {
        std::vector<std::string> ids;
        ids.reserve(blocks_.size());
        for (const Block& b : blocks_) {
            ids.push_back(b.id);
        }
        return ids;
    }

    ParamStore zeros_like() const {
        ParamStore out;
        for (const Block& b : blocks_) {
            out.add_block(b.id);
            for (const Entry& e : b.entries) {
                out.add(b.id, e.name, e.tensor.zeros_like());
            }
        }
        return out;
    }

    bool same_structure(const ParamStore& other) const {
        if (blocks_.size() != other.blocks_.size()) {
            return false;
        }
        for (size_t i = 0; i < blocks_.size(); ++i) {
            const Block& a = blocks_[i];
            const Block& b = other.blocks_[i];
            if (a.id != b.id || a.entries.size() != b.entries.size()) {
                return false;
            }
            for (size_t j = 0; j < a.entries.size(); ++j) {
                if (a.entries[j].name != b.entries[j].name ||
                    !a.entries[j].tensor.same_shape(b.entries[j].tensor)) {
                    return false;
                }
            }
        }
        return true;
    }

    // Accumulates `other` into this store (used to sum per-sentence grads).
    void accumulate(const ParamStore& other) {
        if (!same_structure(other)) {
            throw GradientError("accumulate: parameter stores differ in structure");
        }
        for (size_t i = 0; i < blocks_.size(); ++i) {
            for (size_t j = 0; j < blocks_[i].entries.size(); ++j) {
                Tensor<T>& dst = blocks_[i].entries[j].tensor;
                const Tensor<T>& src = other.blocks_[i].entries[j].tensor;
                for (size_t k = 0; k < dst.data.size(); ++k) {
                    dst.data[k] += src.data[k];
                }
            }
        }
    }

    size_t total_params() const {
        size_t n = 0;
        for (const Block& b : blocks_) {
            for (const Entry& e : b.entries) {
                n += e.tensor.numel();
            }
        }
        return n;
    }

private:
    size_t index_of(const std::string& id) const {
        auto it = block_index_.find(id);
        if (it == block_index_.end()) {
            throw ConfigError("unknown block id: " + id);
        }
        return it->second;
    }

    std::vector<Block> blocks_;
    std::map<std::string, size_t> block_index_;
};

} // namespace af

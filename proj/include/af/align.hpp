#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "af/error.hpp"
#include "af/tensor.hpp"

namespace af::align {

// One tokenized sentence pair. Tokens never contain internal whitespace.
struct SentencePair {
    std::vector<std::string> src_tokens;
    std::vector<std::string> tgt_tokens;
};

struct AlignmentLink {
    size_t s = 0; // source token index
    size_t t = 0; // target token index

    friend auto operator<=>(const AlignmentLink&, const AlignmentLink&) = default;
};

// A set of word-alignment links together with the sentence lengths they are
// bounded by. Links are kept sorted (s, then t), which fixes iteration order
// for every downstream pass.
struct AlignmentSet {
    std::set<AlignmentLink> links;
    size_t src_len = 0;
    size_t tgt_len = 0;

    bool operator==(const AlignmentSet&) const = default;

    void insert(size_t s, size_t t); // throws DimensionError on out-of-bounds
    bool contains(size_t s, size_t t) const { return links.count({s, t}) > 0; }
    size_t size() const { return links.size(); }
};

// Source word -> set of translations. Keys and values are case-folded on
// insertion when fold_case is set (ASCII fold; the desk-scale vocabulary is
// ASCII, see README).
struct BilingualDictionary {
    std::map<std::string, std::set<std::string>> entries;
    bool fold_case = true;

    void add(const std::string& src, const std::string& tgt);
    const std::set<std::string>* lookup(const std::string& src) const;
    bool empty() const { return entries.empty(); }
    size_t size() const { return entries.size(); }
};

std::string fold_case_ascii(const std::string& s);

// Parses one line of `s-t` pairs (Pharaoh notation). Duplicates collapse.
// Malformed tokens and out-of-range indices raise ParseError naming the
// offending token and its 1-based column.
AlignmentSet parse_pharaoh(const std::string& text, size_t src_len, size_t tgt_len);

// Canonical inverse of parse_pharaoh: links sorted, single-space separated.
std::string format_pharaoh(const AlignmentSet& a);

// Grow-diag-final-and symmetrization of two directional alignments.
// Seeds with the intersection, grows over the 8-neighborhood into the union
// while either endpoint is unaligned (to fixpoint), then runs final-and over
// the forward links and then the backward links, adding a link only when
// both its endpoints are still unaligned.
AlignmentSet symmetrize_gdfa(const AlignmentSet& forward, const AlignmentSet& backward);

AlignmentSet intersect(const AlignmentSet& a, const AlignmentSet& b);
AlignmentSet unite(const AlignmentSet& a, const AlignmentSet& b);

// Dictionary lookup alignment. Candidate links are every (s, t) whose target
// token is a listed translation of the source token; any index on either
// side that participates in more than one candidate is dropped with all its
// links (strict one-to-one retention); links whose folded surface strings
// are identical are discarded.
AlignmentSet dictionary_align(const SentencePair& pair, const BilingualDictionary& dict);

enum class Pooling {
    First,
    Mean,
};

Pooling pooling_from_string(const std::string& s); // throws ConfigError

// Pools hidden-state rows over index spans: one output vector per span.
template <typename T>
Tensor<T> select_word_reps(const Tensor<T>& hidden,
                           const std::vector<std::vector<size_t>>& spans,
                           Pooling pooling) {
    const size_t n = hidden.rows();
    const size_t d = hidden.cols();
    Tensor<T> out = Tensor<T>::matrix(spans.size(), d);
    for (size_t i = 0; i < spans.size(); ++i) {
        const std::vector<size_t>& span = spans[i];
        if (span.empty()) {
            throw SpanError("empty span at position " + std::to_string(i));
        }
        for (const size_t idx : span) {
            if (idx >= n) {
                throw SpanError("span index " + std::to_string(idx) +
                                " out of bounds for sequence of length " + std::to_string(n));
            }
        }
        if (pooling == Pooling::First) {
            for (size_t j = 0; j < d; ++j) {
                out(i, j) = hidden(span[0], j);
            }
        } else {
            for (const size_t idx : span) {
                for (size_t j = 0; j < d; ++j) {
                    out(i, j) += hidden(idx, j);
                }
            }
            const T inv = T(1) / static_cast<T>(span.size());
            for (size_t j = 0; j < d; ++j) {
                out(i, j) *= inv;
            }
        }
    }
    return out;
}

// --- file formats ---------------------------------------------------------

// UTF-8 TSV, one pair per line, `src<TAB>tgt`, tokens split on single spaces.
std::vector<SentencePair> read_parallel_corpus(const std::string& path);
std::vector<SentencePair> parse_parallel_corpus(const std::string& text, const std::string& origin);
void write_parallel_corpus(const std::string& path, const std::vector<SentencePair>& pairs);
std::string format_sentence_pair(const SentencePair& pair);

// One Pharaoh line per corpus line.
std::vector<AlignmentSet> read_pharaoh_file(const std::string& path,
                                            const std::vector<SentencePair>& corpus);
void write_pharaoh_file(const std::string& path, const std::vector<AlignmentSet>& alignments);

// `source_word<TAB>target_word` per line; repeated sources accumulate.
BilingualDictionary read_dictionary(const std::string& path, bool fold_case = true);
void write_dictionary(const std::string& path, const BilingualDictionary& dict);

} // namespace af::align

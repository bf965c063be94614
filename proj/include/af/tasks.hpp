#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "af/align.hpp"
#include "af/encoder.hpp"
#include "af/error.hpp"
#include "af/task_head.hpp"

namespace af::tasks {

struct TargetLanguageSpec {
    std::string id;
    uint64_t cipher_seed = 0;
    double reorder_prob = 0.0; // adjacent-swap probability per position
};

// Deterministic synthetic-language testbed: a tag-conditioned unigram source
// language plus bijective word-cipher targets over disjoint id ranges, so a
// model fine-tuned on the source has literally untrained target embeddings.
struct SyntheticSpec {
    size_t vocab_size = 200; // word types per language
    size_t num_tags = 6;     // K
    size_t min_len = 5;
    size_t max_len = 12;
    size_t n_train = 2000;
    size_t n_eval = 500;
    size_t n_parallel = 2000;
    double reorder_prob = 0.0; // default for languages that do not override
    std::vector<TargetLanguageSpec> languages;
    uint64_t master_seed = 0;
    // Total id budget across all language ranges; 0 disables the check.
    size_t max_vocab_table = 0;

    static SyntheticSpec defaults() {
        SyntheticSpec spec;
        spec.languages = {{"tgt0", 1, 0.0}, {"tgt1", 2, 0.3}};
        return spec;
    }

    void validate() const;                 // throws SpecError
    size_t required_vocab() const {        // ids 0..required_vocab-1 are used
        return vocab_size * (1 + languages.size());
    }
};

struct LabeledSentence {
    std::vector<size_t> token_ids;
    std::vector<size_t> tags; // token task; same length as token_ids
    size_t label = 0;         // sentence task: majority tag
};

struct LanguageData {
    std::string id;
    size_t id_base = 0; // first encoder id of this language's range
    double reorder_prob = 0.0;
    std::vector<LabeledSentence> eval;
    align::BilingualDictionary dictionary;
    std::vector<align::SentencePair> parallel;       // source surface <TAB> target surface
    std::vector<align::AlignmentSet> gold_alignments; // permutation alignments
};

struct TaskBundle {
    SyntheticSpec spec;
    std::vector<LabeledSentence> train;       // source language
    std::vector<LabeledSentence> source_eval; // source language
    std::vector<LanguageData> targets;
    std::vector<size_t> word_tag; // source word id -> true tag
};

// Token surfaces are "w<encoder id>"; the id spaces of the source and each
// target are disjoint so a surface names its language range unambiguously.
std::string token_surface(size_t id);
size_t token_id(const std::string& surface); // throws ParseError

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

TaskBundle generate_bundle(const SyntheticSpec& spec);

// On-disk bundle layout (all through the project's own file formats):
//   bundle.json, train.labels.tsv, eval.src.labels.tsv,
//   per target L: eval.L.labels.tsv, parallel.L.tsv, parallel.L.pharaoh,
//   dict.L.tsv
void write_bundle(const std::string& dir, const TaskBundle& bundle);
TaskBundle load_bundle(const std::string& dir);

// Labels file: one `token<TAB>tag` line per token, blank line between
// sentences.
void write_labels_file(const std::string& path, const std::vector<LabeledSentence>& data);
std::vector<LabeledSentence> read_labels_file(const std::string& path);

size_t majority_tag(const std::vector<size_t>& tags);

// Micro-averaged argmax accuracies.
double evaluate_token_task(const encoder::EncoderModel<float>& model,
                           const pipeline::TaskHead<float>& head,
                           const std::vector<LabeledSentence>& data);
double evaluate_sentence_task(const encoder::EncoderModel<float>& model,
                              const pipeline::TaskHead<float>& head,
                              const std::vector<LabeledSentence>& data);

} // namespace af::tasks

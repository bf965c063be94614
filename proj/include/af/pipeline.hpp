#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "af/adam.hpp"
#include "af/align.hpp"
#include "af/encoder.hpp"
#include "af/error.hpp"
#include "af/evalstats.hpp"
#include "af/realign_loss.hpp"
#include "af/task_head.hpp"
#include "af/tasks.hpp"

namespace af::pipeline {

struct TrainConfig {
    size_t realign_steps = 600;
    size_t realign_batch_pairs = 16; // aligned word pairs per realignment batch
    double realign_lr = 1e-3;
    size_t finetune_epochs = 2;
    size_t finetune_batch = 32; // sentences per fine-tuning batch
    double finetune_lr = 1e-3;
    size_t max_len_realign = 96;
    size_t max_len_finetune = 200;
    uint64_t seed = 1;

    // Step/epoch budgets of zero are valid no-ops; the remaining counts and
    // rates must be positive.
    void validate() const {
        if (realign_batch_pairs == 0 || finetune_batch == 0 || max_len_realign == 0 ||
            max_len_finetune == 0) {
            throw ConfigError("batch sizes and max lengths must be positive");
        }
        if (!(realign_lr > 0) || !(finetune_lr > 0)) {
            throw ConfigError("learning rates must be positive");
        }
    }
};

struct CorpusPair {
    align::SentencePair pair;
    align::AlignmentSet links;
};

struct RealignReport {
    size_t steps = 0;
    size_t pairs_seen = 0; // aligned word pairs consumed
    std::vector<double> loss_trace;
};

// Steps 2-4 of the procedure: freeze the strategy's blocks, minimize the
// contrastive loss over batches of aligned word pairs, return with every
// block unfrozen. Frozen blocks come back bit-identical.
RealignReport run_realignment(encoder::EncoderModel<float>& model,
                              const std::vector<CorpusPair>& corpus,
                              const encoder::FreezeStrategy& strategy, const TrainConfig& cfg,
                              const realign::LossConfig& loss_cfg,
                              align::Pooling pooling = align::Pooling::Mean);

struct FinetuneReport {
    size_t steps = 0;
    std::vector<double> loss_trace;
};

// Step 5: softmax cross-entropy fine-tuning of the whole model plus head.
// No freezing; fresh optimizer state; deterministic given cfg.seed.
FinetuneReport run_finetune(encoder::EncoderModel<float>& model, TaskHead<float>& head,
                            const std::vector<tasks::LabeledSentence>& data,
                            const TrainConfig& cfg);

// A strategy row of an experiment: either fine-tuning only (no realignment)
// or realignment under a freeze strategy followed by fine-tuning.
struct ExperimentStrategy {
    bool finetune_only = false;
    encoder::FreezeStrategy freeze;

    static ExperimentStrategy parse(const std::string& s);
    std::string name() const;
};

enum class AlignmentSource {
    Gold,       // the bundle's gold permutation alignments
    Dictionary, // in-process dictionary extraction
};

AlignmentSource alignment_source_from_string(const std::string& s);
std::string to_string(AlignmentSource a);

struct ExperimentSpec {
    encoder::EncoderConfig encoder_cfg;
    TaskKind task_kind = TaskKind::TokenClassifier;
    tasks::SyntheticSpec synthetic = tasks::SyntheticSpec::defaults();
    std::vector<std::string> strategies; // parsed via ExperimentStrategy::parse
    TrainConfig train;
    realign::LossConfig loss;
    align::Pooling pooling = align::Pooling::Mean;
    AlignmentSource alignment_source = AlignmentSource::Gold;
    evalstats::StdMode std_mode = evalstats::StdMode::Sample;
    evalstats::ThresholdRule threshold_rule = evalstats::ThresholdRule::MaxStd;

    void validate() const;
};

ExperimentSpec experiment_spec_from_json_text(const std::string& text,
                                              const std::string& origin);
std::string experiment_spec_to_json_text(const ExperimentSpec& spec);

struct LanguageResult {
    std::vector<double> per_seed;
    evalstats::RunStats stats;
    std::optional<evalstats::SignificanceVerdict> verdict; // vs finetune_only
};

struct ExperimentReport {
    std::string metric;                  // token_accuracy | sentence_accuracy
    std::vector<uint64_t> seeds;
    std::vector<std::string> strategy_order;
    // strategy -> language -> result; languages are "src" plus target ids.
    std::map<std::string, std::map<std::string, LanguageResult>> results;
    std::string baseline; // strategy the verdicts compare against, if any
    std::string config_hash;
};

ExperimentReport run_experiment(const ExperimentSpec& spec, const tasks::TaskBundle& bundle,
                                const std::vector<uint64_t>& seeds);
// Generates the bundle from spec.synthetic in memory.
ExperimentReport run_experiment(const ExperimentSpec& spec, const std::vector<uint64_t>& seeds);

std::string report_to_json_text(const ExperimentReport& report);
ExperimentReport report_from_json_text(const std::string& text, const std::string& origin);
std::string report_to_csv(const ExperimentReport& report);
// Plain-text table: per strategy, mean over target languages and the
// up/down/same tallies against the baseline.
std::string report_to_table(const ExperimentReport& report);

// Extracts realignment training pairs from a bundle according to the
// configured alignment source, interleaving target languages round-robin.
std::vector<CorpusPair> realignment_corpus(const tasks::TaskBundle& bundle,
                                           AlignmentSource source);

uint64_t fnv1a_hash(const std::string& text);
std::string hash_hex(const std::string& text);

} // namespace af::pipeline

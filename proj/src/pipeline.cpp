#include "af/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "af/rng.hpp"

namespace af::pipeline {

using nlohmann::json;

namespace {

void scale_store(ParamStore<float>& store, float factor) {
    for (auto& block : store.blocks()) {
        for (auto& e : block.entries) {
            for (float& v : e.tensor.data) {
                v *= factor;
            }
        }
    }
}

std::vector<size_t> surface_ids(const std::vector<std::string>& tokens) {
    std::vector<size_t> ids;
    ids.reserve(tokens.size());
    for (const std::string& t : tokens) {
        ids.push_back(tasks::token_id(t));
    }
    return ids;
}

bool ids_in_vocab(const std::vector<size_t>& ids, size_t vocab_size) {
    for (const size_t id : ids) {
        if (id >= vocab_size) {
            return false;
        }
    }
    return true;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

RealignReport run_realignment(encoder::EncoderModel<float>& model,
                              const std::vector<CorpusPair>& corpus,
                              const encoder::FreezeStrategy& strategy, const TrainConfig& cfg,
                              const realign::LossConfig& loss_cfg, align::Pooling pooling) {
    cfg.validate();
    loss_cfg.validate();
    const size_t max_len = std::min(cfg.max_len_realign, model.config.max_seq_len);

    struct Usable {
        std::vector<size_t> src_ids;
        std::vector<size_t> tgt_ids;
        std::vector<align::AlignmentLink> links; // sorted
    };
    std::vector<Usable> usable;
    for (const CorpusPair& cp : corpus) {
        if (cp.links.links.empty() || cp.pair.src_tokens.size() > max_len ||
            cp.pair.tgt_tokens.size() > max_len || cp.pair.src_tokens.empty() ||
            cp.pair.tgt_tokens.empty()) {
            continue;
        }
        Usable u;
        u.src_ids = surface_ids(cp.pair.src_tokens);
        u.tgt_ids = surface_ids(cp.pair.tgt_tokens);
        if (!ids_in_vocab(u.src_ids, model.config.vocab_size) ||
            !ids_in_vocab(u.tgt_ids, model.config.vocab_size)) {
            continue;
        }
        u.links.assign(cp.links.links.begin(), cp.links.links.end());
        usable.push_back(std::move(u));
    }
    if (usable.empty()) {
        throw DataError("realignment corpus holds no usable aligned pairs");
    }

    const encoder::FreezeMask mask = encoder::apply_freeze(strategy, model.config.num_layers);
    auto opt = optim::AdamState<float>::zeros_like(model.params);
    const size_t rep_layer = loss_cfg.resolve_layer(model.config.num_layers);
    const size_t d = model.config.hidden_dim;

    RealignReport report;
    size_t cursor = 0;
    for (size_t step = 0; step < cfg.realign_steps; ++step) {
        struct Contribution {
            encoder::ForwardTrace<float> src_trace;
            encoder::ForwardTrace<float> tgt_trace;
            std::vector<align::AlignmentLink> links;
        };
        std::vector<Contribution> contribs;
        realign::RealignBatch<float> batch;
        while (batch.pair_count < cfg.realign_batch_pairs) {
            const Usable& u = usable[cursor];
            cursor = (cursor + 1) % usable.size();

            Contribution c;
            c.src_trace = encoder::forward(model, u.src_ids);
            c.tgt_trace = encoder::forward(model, u.tgt_ids);
            const Tensor<float>& hs = c.src_trace.states[rep_layer];
            const Tensor<float>& ht = c.tgt_trace.states[rep_layer];

            const size_t capacity = cfg.realign_batch_pairs - batch.pair_count;
            const size_t take = std::min(capacity, u.links.size());
            c.links.assign(u.links.begin(), u.links.begin() + static_cast<long>(take));
            for (const align::AlignmentLink& l : c.links) {
                std::vector<float> srow(d), trow(d);
                for (size_t j = 0; j < d; ++j) {
                    srow[j] = hs(l.s, j);
                    trow[j] = ht(l.t, j);
                }
                batch.add_pair(srow, trow);
            }
            contribs.push_back(std::move(c));
        }

        const realign::LossResult<float> loss = realign::contrastive_loss(batch, loss_cfg);
        report.loss_trace.push_back(static_cast<double>(loss.loss));
        report.pairs_seen += batch.pair_count;

        ParamStore<float> grads = model.params.zeros_like();
        size_t row = 0;
        for (const auto& c : contribs) {
            Tensor<float> up_src =
                Tensor<float>::matrix(c.src_trace.token_ids.size(), d);
            Tensor<float> up_tgt =
                Tensor<float>::matrix(c.tgt_trace.token_ids.size(), d);
            for (const align::AlignmentLink& l : c.links) {
                for (size_t j = 0; j < d; ++j) {
                    up_src(l.s, j) += loss.rep_grads(row, j);
                    up_tgt(l.t, j) += loss.rep_grads(row + 1, j);
                }
                row += 2;
            }
            grads.accumulate(
                encoder::backward(model, c.src_trace, encoder::UpstreamGrads<float>{{rep_layer, up_src}}));
            grads.accumulate(
                encoder::backward(model, c.tgt_trace, encoder::UpstreamGrads<float>{{rep_layer, up_tgt}}));
        }
        optim::train_step(model, grads, mask, opt, cfg.realign_lr);
        ++report.steps;
    }
    (void)pooling; // spans are singletons at whitespace-token scale
    return report;
}

FinetuneReport run_finetune(encoder::EncoderModel<float>& model, TaskHead<float>& head,
                            const std::vector<tasks::LabeledSentence>& data,
                            const TrainConfig& cfg) {
    cfg.validate();
    if (data.empty()) {
        throw DataError("fine-tuning data is empty");
    }
    const size_t max_len = std::min(cfg.max_len_finetune, model.config.max_seq_len);
    for (const tasks::LabeledSentence& s : data) {
        if (s.token_ids.empty() || s.token_ids.size() > max_len) {
            throw DataError("fine-tuning sentence length outside (0, " +
                            std::to_string(max_len) + "]");
        }
        if (!ids_in_vocab(s.token_ids, model.config.vocab_size)) {
            throw DataError("fine-tuning sentence uses out-of-vocabulary ids");
        }
        if (head.kind == TaskKind::TokenClassifier) {
            if (s.tags.size() != s.token_ids.size()) {
                throw DataError("token task sentence without per-token tags");
            }
            for (const size_t t : s.tags) {
                if (t >= head.num_labels) {
                    throw DataError("tag " + std::to_string(t) + " out of range");
                }
            }
        } else if (s.label >= head.num_labels) {
            throw DataError("label " + std::to_string(s.label) + " out of range");
        }
    }

    auto model_opt = optim::AdamState<float>::zeros_like(model.params);
    auto head_opt = optim::AdamState<float>::zeros_like(head.params);
    const encoder::FreezeMask no_mask;

    FinetuneReport report;
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, "finetune.epoch." + std::to_string(epoch)));
        rng.shuffle(order);
        for (size_t start = 0; start < order.size(); start += cfg.finetune_batch) {
            const size_t stop = std::min(order.size(), start + cfg.finetune_batch);
            ParamStore<float> model_grads = model.params.zeros_like();
            ParamStore<float> head_grads = head.params.zeros_like();
            float loss_sum = 0.0f;
            size_t units = 0;
            for (size_t i = start; i < stop; ++i) {
                const tasks::LabeledSentence& s = data[order[i]];
                const auto trace = encoder::forward(model, s.token_ids);
                HeadBackward<float> hb =
                    head.kind == TaskKind::TokenClassifier
                        ? token_ce_backward(head, trace.states.back(), s.tags)
                        : sentence_ce_backward(head, trace.states.back(), s.label);
                loss_sum += hb.loss_sum;
                units += hb.unit_count;
                model_grads.accumulate(encoder::backward(
                    model, trace,
                    encoder::UpstreamGrads<float>{{model.config.num_layers, hb.d_hidden}}));
                head_grads.accumulate(hb.head_grads);
            }
            const float inv_units = 1.0f / static_cast<float>(units);
            scale_store(model_grads, inv_units);
            scale_store(head_grads, inv_units);
            optim::train_step(model, model_grads, no_mask, model_opt, cfg.finetune_lr);
            optim::train_step(head.params, head_grads, no_mask, head_opt, cfg.finetune_lr);
            report.loss_trace.push_back(static_cast<double>(loss_sum) * inv_units);
            ++report.steps;
        }
    }
    return report;
}

ExperimentStrategy ExperimentStrategy::parse(const std::string& s) {
    ExperimentStrategy strat;
    if (s == "finetune_only") {
        strat.finetune_only = true;
        return strat;
    }
    strat.freeze = encoder::freeze_strategy_from_string(s);
    return strat;
}

std::string ExperimentStrategy::name() const {
    return finetune_only ? "finetune_only" : encoder::to_string(freeze);
}

AlignmentSource alignment_source_from_string(const std::string& s) {
    if (s == "gold") {
        return AlignmentSource::Gold;
    }
    if (s == "dictionary") {
        return AlignmentSource::Dictionary;
    }
    throw ConfigError("unknown alignment source '" + s + "' (expected gold|dictionary)");
}

std::string to_string(AlignmentSource a) {
    return a == AlignmentSource::Gold ? "gold" : "dictionary";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "token") {
        return TaskKind::TokenClassifier;
    }
    if (s == "sentence") {
        return TaskKind::SentenceClassifier;
    }
    throw ConfigError("unknown task kind '" + s + "' (expected token|sentence)");
}

std::string to_string(TaskKind k) {
    return k == TaskKind::TokenClassifier ? "token" : "sentence";
}

void ExperimentSpec::validate() const {
    encoder_cfg.validate();
    synthetic.validate();
    train.validate();
    loss.validate();
    loss.resolve_layer(encoder_cfg.num_layers);
    if (strategies.empty()) {
        throw ConfigError("experiment needs at least one strategy");
    }
    for (const std::string& s : strategies) {
        ExperimentStrategy::parse(s);
    }
    if (synthetic.required_vocab() > encoder_cfg.vocab_size) {
        throw ConfigError("synthetic languages need " +
                          std::to_string(synthetic.required_vocab()) +
                          " vocabulary ids but the encoder has " +
                          std::to_string(encoder_cfg.vocab_size));
    }
    if (synthetic.max_len > encoder_cfg.max_seq_len) {
        throw ConfigError("synthetic max_len exceeds encoder max_seq_len");
    }
}

std::vector<CorpusPair> realignment_corpus(const tasks::TaskBundle& bundle,
                                           AlignmentSource source) {
    std::vector<CorpusPair> corpus;
    size_t max_n = 0;
    for (const tasks::LanguageData& lang : bundle.targets) {
        max_n = std::max(max_n, lang.parallel.size());
    }
    for (size_t i = 0; i < max_n; ++i) {
        for (const tasks::LanguageData& lang : bundle.targets) {
            if (i >= lang.parallel.size()) {
                continue;
            }
            CorpusPair cp;
            cp.pair = lang.parallel[i];
            cp.links = source == AlignmentSource::Gold
                           ? lang.gold_alignments[i]
                           : align::dictionary_align(cp.pair, lang.dictionary);
            corpus.push_back(std::move(cp));
        }
    }
    return corpus;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const tasks::TaskBundle& bundle,
                                const std::vector<uint64_t>& seeds) {
    spec.validate();
    if (seeds.empty()) {
        throw ConfigError("experiment needs at least one seed");
    }

    std::vector<ExperimentStrategy> strategies;
    strategies.reserve(spec.strategies.size());
    for (const std::string& s : spec.strategies) {
        strategies.push_back(ExperimentStrategy::parse(s));
    }

    const std::vector<CorpusPair> corpus =
        realignment_corpus(bundle, spec.alignment_source);

    ExperimentReport report;
    report.metric = spec.task_kind == TaskKind::TokenClassifier ? "token_accuracy"
                                                                : "sentence_accuracy";
    report.seeds = seeds;
    report.config_hash = hash_hex(experiment_spec_to_json_text(spec));

    for (const ExperimentStrategy& strategy : strategies) {
        const std::string name = strategy.name();
        report.strategy_order.push_back(name);
        for (const uint64_t seed : seeds) {
            auto model = encoder::init_model<float>(spec.encoder_cfg, seed);
            TrainConfig cfg = spec.train;
            cfg.seed = seed;
            if (!strategy.finetune_only) {
                run_realignment(model, corpus, strategy.freeze, cfg, spec.loss, spec.pooling);
            }
            auto head = TaskHead<float>::init(spec.task_kind, spec.encoder_cfg.hidden_dim,
                                              spec.synthetic.num_tags, derive_seed(seed, "head"));
            run_finetune(model, head, bundle.train, cfg);

            auto eval = [&](const std::vector<tasks::LabeledSentence>& data) {
                return spec.task_kind == TaskKind::TokenClassifier
                           ? tasks::evaluate_token_task(model, head, data)
                           : tasks::evaluate_sentence_task(model, head, data);
            };
            report.results[name]["src"].per_seed.push_back(eval(bundle.source_eval));
            for (const tasks::LanguageData& lang : bundle.targets) {
                report.results[name][lang.id].per_seed.push_back(eval(lang.eval));
            }
        }
    }

    for (auto& [name, languages] : report.results) {
        for (auto& [lang, result] : languages) {
            result.stats = evalstats::aggregate(result.per_seed, spec.std_mode);
        }
    }
    const auto baseline_it = std::find(report.strategy_order.begin(),
                                       report.strategy_order.end(), "finetune_only");
    if (baseline_it != report.strategy_order.end()) {
        report.baseline = "finetune_only";
        const auto& base_langs = report.results.at("finetune_only");
        for (auto& [name, languages] : report.results) {
            for (auto& [lang, result] : languages) {
                result.verdict = evalstats::significance(base_langs.at(lang).stats, result.stats,
                                                         spec.threshold_rule);
            }
        }
    }
    return report;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const std::vector<uint64_t>& seeds) {
    return run_experiment(spec, tasks::generate_bundle(spec.synthetic), seeds);
}

// --- spec / report serialization -------------------------------------------

namespace {

json encoder_cfg_to_json(const encoder::EncoderConfig& cfg) {
    return json{{"num_layers", cfg.num_layers},   {"hidden_dim", cfg.hidden_dim},
                {"num_heads", cfg.num_heads},     {"ffn_dim", cfg.ffn_dim},
                {"vocab_size", cfg.vocab_size},   {"max_seq_len", cfg.max_seq_len},
                {"ln_eps", cfg.ln_eps}};
}

encoder::EncoderConfig encoder_cfg_from_json(const json& j) {
    encoder::EncoderConfig cfg;
    cfg.num_layers = j.at("num_layers").get<size_t>();
    cfg.hidden_dim = j.at("hidden_dim").get<size_t>();
    cfg.num_heads = j.at("num_heads").get<size_t>();
    cfg.ffn_dim = j.at("ffn_dim").get<size_t>();
    cfg.vocab_size = j.at("vocab_size").get<size_t>();
    cfg.max_seq_len = j.at("max_seq_len").get<size_t>();
    cfg.ln_eps = j.value("ln_eps", 1e-5);
    return cfg;
}

json train_cfg_to_json(const TrainConfig& cfg) {
    return json{{"realign_steps", cfg.realign_steps},
                {"realign_batch_pairs", cfg.realign_batch_pairs},
                {"realign_lr", cfg.realign_lr},
                {"finetune_epochs", cfg.finetune_epochs},
                {"finetune_batch", cfg.finetune_batch},
                {"finetune_lr", cfg.finetune_lr},
                {"max_len_realign", cfg.max_len_realign},
                {"max_len_finetune", cfg.max_len_finetune},
                {"seed", cfg.seed}};
}

TrainConfig train_cfg_from_json(const json& j) {
    TrainConfig cfg;
    cfg.realign_steps = j.value("realign_steps", cfg.realign_steps);
    cfg.realign_batch_pairs = j.value("realign_batch_pairs", cfg.realign_batch_pairs);
    cfg.realign_lr = j.value("realign_lr", cfg.realign_lr);
    cfg.finetune_epochs = j.value("finetune_epochs", cfg.finetune_epochs);
    cfg.finetune_batch = j.value("finetune_batch", cfg.finetune_batch);
    cfg.finetune_lr = j.value("finetune_lr", cfg.finetune_lr);
    cfg.max_len_realign = j.value("max_len_realign", cfg.max_len_realign);
    cfg.max_len_finetune = j.value("max_len_finetune", cfg.max_len_finetune);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

} // namespace

ExperimentSpec experiment_spec_from_json_text(const std::string& text,
                                              const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": invalid json: " + e.what());
    }
    ExperimentSpec spec;
    try {
        spec.encoder_cfg = encoder_cfg_from_json(j.at("encoder"));
        if (j.contains("task")) {
            spec.task_kind = task_kind_from_string(j.at("task").value("kind", "token"));
        }
        if (j.contains("synthetic")) {
            spec.synthetic = tasks::synthetic_spec_from_json(j.at("synthetic"));
        }
        spec.strategies = j.at("strategies").get<std::vector<std::string>>();
        if (j.contains("train")) {
            spec.train = train_cfg_from_json(j.at("train"));
        }
        if (j.contains("loss")) {
            spec.loss.temperature = j.at("loss").value("temperature", 0.1);
            spec.loss.representation_layer = j.at("loss").value("representation_layer", -1);
        }
        spec.pooling = align::pooling_from_string(j.value("pooling", "mean"));
        spec.alignment_source = alignment_source_from_string(j.value("alignment_source", "gold"));
        if (j.contains("stats")) {
            spec.std_mode =
                evalstats::std_mode_from_string(j.at("stats").value("std_mode", "sample"));
            spec.threshold_rule =
                evalstats::threshold_rule_from_string(j.at("stats").value("threshold_rule", "max"));
        }
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    spec.validate();
    return spec;
}

std::string experiment_spec_to_json_text(const ExperimentSpec& spec) {
    const json j{{"encoder", encoder_cfg_to_json(spec.encoder_cfg)},
                 {"task", json{{"kind", to_string(spec.task_kind)}}},
                 {"synthetic", tasks::synthetic_spec_to_json(spec.synthetic)},
                 {"strategies", spec.strategies},
                 {"train", train_cfg_to_json(spec.train)},
                 {"loss", json{{"temperature", spec.loss.temperature},
                               {"representation_layer", spec.loss.representation_layer}}},
                 {"pooling", spec.pooling == align::Pooling::Mean ? "mean" : "first"},
                 {"alignment_source", to_string(spec.alignment_source)},
                 {"stats", json{{"std_mode", to_string(spec.std_mode)},
                                {"threshold_rule", to_string(spec.threshold_rule)}}}};
    return j.dump(2) + "\n";
}

std::string report_to_json_text(const ExperimentReport& report) {
    json strategies = json::object();
    for (const auto& [name, languages] : report.results) {
        json langs = json::object();
        for (const auto& [lang, result] : languages) {
            json entry{{"per_seed", result.per_seed},
                       {"mean", result.stats.mean},
                       {"std", result.stats.std},
                       {"n", result.stats.n}};
            if (result.verdict) {
                entry["verdict"] = json{{"direction", evalstats::to_string(result.verdict->direction)},
                                        {"delta", result.verdict->delta},
                                        {"threshold", result.verdict->threshold}};
            }
            langs[lang] = std::move(entry);
        }
        strategies[name] = std::move(langs);
    }
    const json j{{"metric", report.metric},
                 {"seeds", report.seeds},
                 {"strategy_order", report.strategy_order},
                 {"baseline", report.baseline},
                 {"config_hash", report.config_hash},
                 {"strategies", strategies}};
    return j.dump(2) + "\n";
}

ExperimentReport report_from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": invalid json: " + e.what());
    }
    ExperimentReport report;
    try {
        report.metric = j.at("metric").get<std::string>();
        report.seeds = j.at("seeds").get<std::vector<uint64_t>>();
        report.strategy_order = j.at("strategy_order").get<std::vector<std::string>>();
        report.baseline = j.value("baseline", "");
        report.config_hash = j.value("config_hash", "");
        for (const auto& [name, langs] : j.at("strategies").items()) {
            for (const auto& [lang, entry] : langs.items()) {
                LanguageResult result;
                result.per_seed = entry.at("per_seed").get<std::vector<double>>();
                result.stats.mean = entry.at("mean").get<double>();
                result.stats.std = entry.at("std").get<double>();
                result.stats.n = entry.at("n").get<size_t>();
                if (entry.contains("verdict")) {
                    evalstats::SignificanceVerdict v;
                    const std::string dir = entry.at("verdict").at("direction").get<std::string>();
                    v.direction = dir == "up"     ? evalstats::Direction::Up
                                  : dir == "down" ? evalstats::Direction::Down
                                                  : evalstats::Direction::Same;
                    v.delta = entry.at("verdict").at("delta").get<double>();
                    v.threshold = entry.at("verdict").at("threshold").get<double>();
                    result.verdict = v;
                }
                report.results[name][lang] = std::move(result);
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    return report;
}

std::string report_to_csv(const ExperimentReport& report) {
    std::string csv = "strategy,language,seed,metric,value\n";
    for (const std::string& name : report.strategy_order) {
        const auto it = report.results.find(name);
        if (it == report.results.end()) {
            continue;
        }
        for (const auto& [lang, result] : it->second) {
            for (size_t i = 0; i < result.per_seed.size(); ++i) {
                csv += name;
                csv += ',';
                csv += lang;
                csv += ',';
                csv += std::to_string(report.seeds[i]);
                csv += ',';
                csv += report.metric;
                csv += ',';
                csv += format_double(result.per_seed[i]);
                csv += '\n';
            }
        }
    }
    return csv;
}

std::string report_to_table(const ExperimentReport& report) {
    std::string table = "metric: " + report.metric;
    if (!report.baseline.empty()) {
        table += "   (verdicts vs " + report.baseline + ")";
    }
    table += '\n';
    char line[160];
    std::snprintf(line, sizeof(line), "%-18s %10s %8s %6s %6s %6s\n", "strategy", "mean", "std",
                  "#up", "#down", "#same");
    table += line;
    for (const std::string& name : report.strategy_order) {
        const auto it = report.results.find(name);
        if (it == report.results.end()) {
            continue;
        }
        // averages over target languages only
        double mean_sum = 0.0, std_sum = 0.0;
        size_t up = 0, down = 0, same = 0, n = 0;
        for (const auto& [lang, result] : it->second) {
            if (lang == "src") {
                continue;
            }
            mean_sum += result.stats.mean;
            std_sum += result.stats.std;
            ++n;
            if (result.verdict) {
                switch (result.verdict->direction) {
                    case evalstats::Direction::Up:
                        ++up;
                        break;
                    case evalstats::Direction::Down:
                        ++down;
                        break;
                    case evalstats::Direction::Same:
                        ++same;
                        break;
                }
            }
        }
        if (n == 0) {
            continue;
        }
        if (!report.baseline.empty() && name != report.baseline) {
            std::snprintf(line, sizeof(line), "%-18s %10.4f %8.4f %6zu %6zu %6zu\n", name.c_str(),
                          mean_sum / static_cast<double>(n), std_sum / static_cast<double>(n), up,
                          down, same);
        } else {
            std::snprintf(line, sizeof(line), "%-18s %10.4f %8.4f %6s %6s %6s\n", name.c_str(),
                          mean_sum / static_cast<double>(n), std_sum / static_cast<double>(n), "-",
                          "-", "-");
        }
        table += line;
    }
    return table;
}

uint64_t fnv1a_hash(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hash_hex(const std::string& text) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(text)));
    return buf;
}

} // namespace af::pipeline

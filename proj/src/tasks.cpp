#include "af/tasks.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "af/rng.hpp"

namespace af::tasks {

namespace fs = std::filesystem;
using nlohmann::json;

void SyntheticSpec::validate() const {
    if (vocab_size == 0 || num_tags == 0 || vocab_size < num_tags) {
        throw SpecError("vocab_size must be >= num_tags >= 1");
    }
    if (min_len == 0 || max_len < min_len) {
        throw SpecError("sentence length range must satisfy 1 <= min <= max");
    }
    if (n_train == 0 || n_eval == 0 || n_parallel == 0) {
        throw SpecError("n_train, n_eval and n_parallel must be positive");
    }
    if (reorder_prob < 0.0 || reorder_prob > 1.0) {
        throw SpecError("reorder_prob must lie in [0, 1]");
    }
    if (languages.empty()) {
        throw SpecError("at least one target language is required");
    }
    for (const TargetLanguageSpec& lang : languages) {
        if (lang.id.empty() || lang.id == "src") {
            throw SpecError("invalid target language id '" + lang.id + "'");
        }
        if (lang.reorder_prob < 0.0 || lang.reorder_prob > 1.0) {
            throw SpecError("reorder_prob out of [0, 1] for language " + lang.id);
        }
    }
    for (size_t i = 0; i < languages.size(); ++i) {
        for (size_t j = i + 1; j < languages.size(); ++j) {
            if (languages[i].id == languages[j].id) {
                throw SpecError("duplicate language id '" + languages[i].id + "'");
            }
        }
    }
    if (max_vocab_table != 0 && required_vocab() > max_vocab_table) {
        throw SpecError("disjoint id ranges need " + std::to_string(required_vocab()) +
                        " ids, exceeding the vocab table budget of " +
                        std::to_string(max_vocab_table));
    }
}

std::string token_surface(size_t id) {
    return "w" + std::to_string(id);
}

size_t token_id(const std::string& surface) {
    if (surface.size() < 2 || surface[0] != 'w') {
        throw ParseError("bad token surface '" + surface + "'");
    }
    size_t id = 0;
    auto [ptr, ec] = std::from_chars(surface.data() + 1, surface.data() + surface.size(), id);
    if (ec != std::errc() || ptr != surface.data() + surface.size()) {
        throw ParseError("bad token surface '" + surface + "'");
    }
    return id;
}

size_t majority_tag(const std::vector<size_t>& tags) {
    if (tags.empty()) {
        throw DataError("majority_tag: empty tag sequence");
    }
    const size_t max_tag = *std::max_element(tags.begin(), tags.end());
    std::vector<size_t> counts(max_tag + 1, 0);
    for (const size_t t : tags) {
        ++counts[t];
    }
    size_t best = 0;
    for (size_t t = 1; t < counts.size(); ++t) {
        if (counts[t] > counts[best]) {
            best = t; // ties keep the smallest tag id
        }
    }
    return best;
}

namespace {

// Tag-conditioned unigram grammar: a first-order Markov chain over tags and
// a fixed word->tag assignment.
struct Grammar {
    std::vector<size_t> word_tag;               // word id -> tag
    std::vector<std::vector<size_t>> tag_words; // tag -> word ids
    std::vector<double> initial;                // tag distribution
    std::vector<std::vector<double>> transition;
};

Grammar build_grammar(const SyntheticSpec& spec) {
    Grammar g;
    Rng rng(derive_seed(spec.master_seed, "grammar"));

    // Balanced word->tag assignment over a shuffled word order, so every tag
    // owns at least one word.
    std::vector<size_t> order(spec.vocab_size);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    g.word_tag.assign(spec.vocab_size, 0);
    g.tag_words.assign(spec.num_tags, {});
    for (size_t i = 0; i < order.size(); ++i) {
        const size_t tag = i % spec.num_tags;
        g.word_tag[order[i]] = tag;
        g.tag_words[tag].push_back(order[i]);
    }
    for (auto& words : g.tag_words) {
        std::sort(words.begin(), words.end());
    }

    auto draw_distribution = [&rng](size_t k) {
        std::vector<double> d(k);
        double sum = 0.0;
        for (double& v : d) {
            v = 0.05 + rng.uniform(); // floor keeps every tag reachable
            sum += v;
        }
        for (double& v : d) {
            v /= sum;
        }
        return d;
    };
    g.initial = draw_distribution(spec.num_tags);
    g.transition.reserve(spec.num_tags);
    for (size_t t = 0; t < spec.num_tags; ++t) {
        g.transition.push_back(draw_distribution(spec.num_tags));
    }
    return g;
}

size_t sample_categorical(Rng& rng, const std::vector<double>& dist) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) {
            return i;
        }
    }
    return dist.size() - 1;
}

LabeledSentence sample_sentence(Rng& rng, const Grammar& g, const SyntheticSpec& spec) {
    LabeledSentence s;
    const size_t len = spec.min_len + rng.bounded(spec.max_len - spec.min_len + 1);
    s.token_ids.reserve(len);
    s.tags.reserve(len);
    size_t tag = sample_categorical(rng, g.initial);
    for (size_t i = 0; i < len; ++i) {
        const std::vector<size_t>& words = g.tag_words[tag];
        s.token_ids.push_back(words[rng.bounded(words.size())]);
        s.tags.push_back(tag);
        tag = sample_categorical(rng, g.transition[tag]);
    }
    s.label = majority_tag(s.tags);
    return s;
}

// Adjacent-swap reordering; returns the source->target position map.
std::vector<size_t> reorder_permutation(Rng& rng, size_t len, double prob) {
    std::vector<size_t> perm(len);
    std::iota(perm.begin(), perm.end(), 0);
    size_t i = 0;
    while (i + 1 < len) {
        if (prob > 0.0 && rng.bernoulli(prob)) {
            std::swap(perm[i], perm[i + 1]);
            i += 2;
        } else {
            ++i;
        }
    }
    // perm[target position] = source position; invert to source -> target
    std::vector<size_t> src_to_tgt(len);
    for (size_t t = 0; t < len; ++t) {
        src_to_tgt[perm[t]] = t;
    }
    return src_to_tgt;
}

} // namespace

TaskBundle generate_bundle(const SyntheticSpec& spec) {
    spec.validate();
    TaskBundle bundle;
    bundle.spec = spec;

    const Grammar grammar = build_grammar(spec);
    bundle.word_tag = grammar.word_tag;

    {
        Rng rng(derive_seed(spec.master_seed, "train"));
        bundle.train.reserve(spec.n_train);
        for (size_t i = 0; i < spec.n_train; ++i) {
            bundle.train.push_back(sample_sentence(rng, grammar, spec));
        }
    }
    {
        Rng rng(derive_seed(spec.master_seed, "eval.src"));
        bundle.source_eval.reserve(spec.n_eval);
        for (size_t i = 0; i < spec.n_eval; ++i) {
            bundle.source_eval.push_back(sample_sentence(rng, grammar, spec));
        }
    }

    for (size_t li = 0; li < spec.languages.size(); ++li) {
        const TargetLanguageSpec& lang_spec = spec.languages[li];
        LanguageData lang;
        lang.id = lang_spec.id;
        lang.id_base = spec.vocab_size * (li + 1);
        lang.reorder_prob = lang_spec.reorder_prob;

        // Bijective cipher of the source vocabulary onto the disjoint range.
        std::vector<size_t> cipher(spec.vocab_size);
        std::iota(cipher.begin(), cipher.end(), 0);
        {
            Rng rng(derive_seed(lang_spec.cipher_seed, "cipher." + lang.id));
            rng.shuffle(cipher);
        }
        auto map_id = [&](size_t w) { return lang.id_base + cipher[w]; };

        lang.dictionary.fold_case = true;
        for (size_t w = 0; w < spec.vocab_size; ++w) {
            lang.dictionary.add(token_surface(w), token_surface(map_id(w)));
        }

        {
            Rng rng(derive_seed(spec.master_seed, "eval." + lang.id));
            lang.eval.reserve(spec.n_eval);
            for (size_t i = 0; i < spec.n_eval; ++i) {
                LabeledSentence s = sample_sentence(rng, grammar, spec);
                const std::vector<size_t> perm =
                    reorder_permutation(rng, s.token_ids.size(), lang.reorder_prob);
                LabeledSentence mapped;
                mapped.token_ids.assign(s.token_ids.size(), 0);
                mapped.tags.assign(s.tags.size(), 0);
                for (size_t p = 0; p < s.token_ids.size(); ++p) {
                    mapped.token_ids[perm[p]] = map_id(s.token_ids[p]);
                    mapped.tags[perm[p]] = s.tags[p];
                }
                mapped.label = s.label;
                lang.eval.push_back(std::move(mapped));
            }
        }

        {
            Rng rng(derive_seed(spec.master_seed, "parallel." + lang.id));
            lang.parallel.reserve(spec.n_parallel);
            lang.gold_alignments.reserve(spec.n_parallel);
            for (size_t i = 0; i < spec.n_parallel; ++i) {
                const LabeledSentence s = sample_sentence(rng, grammar, spec);
                const size_t len = s.token_ids.size();
                const std::vector<size_t> perm =
                    reorder_permutation(rng, len, lang.reorder_prob);

                align::SentencePair pair;
                pair.src_tokens.reserve(len);
                pair.tgt_tokens.assign(len, {});
                align::AlignmentSet gold;
                gold.src_len = len;
                gold.tgt_len = len;
                for (size_t p = 0; p < len; ++p) {
                    pair.src_tokens.push_back(token_surface(s.token_ids[p]));
                    pair.tgt_tokens[perm[p]] = token_surface(map_id(s.token_ids[p]));
                    gold.links.insert({p, perm[p]});
                }
                lang.parallel.push_back(std::move(pair));
                lang.gold_alignments.push_back(std::move(gold));
            }
        }
        bundle.targets.push_back(std::move(lang));
    }
    return bundle;
}

void write_labels_file(const std::string& path, const std::vector<LabeledSentence>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    for (size_t i = 0; i < data.size(); ++i) {
        if (i) {
            out << '\n';
        }
        for (size_t p = 0; p < data[i].token_ids.size(); ++p) {
            out << token_surface(data[i].token_ids[p]) << '\t' << data[i].tags[p] << '\n';
        }
    }
}

std::vector<LabeledSentence> read_labels_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::vector<LabeledSentence> data;
    LabeledSentence current;
    std::string line;
    size_t lineno = 0;
    auto flush = [&] {
        if (!current.token_ids.empty()) {
            current.label = majority_tag(current.tags);
            data.push_back(std::move(current));
            current = LabeledSentence{};
        }
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            flush();
            continue;
        }
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": missing tab");
        }
        current.token_ids.push_back(token_id(line.substr(0, tab)));
        size_t tag = 0;
        const std::string tag_str = line.substr(tab + 1);
        auto [ptr, ec] = std::from_chars(tag_str.data(), tag_str.data() + tag_str.size(), tag);
        if (ec != std::errc() || ptr != tag_str.data() + tag_str.size()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad tag '" + tag_str + "'");
        }
        current.tags.push_back(tag);
    }
    flush();
    return data;
}

json synthetic_spec_to_json(const SyntheticSpec& spec) {
    json langs = json::array();
    for (const TargetLanguageSpec& l : spec.languages) {
        langs.push_back({{"id", l.id}, {"cipher_seed", l.cipher_seed},
                         {"reorder_prob", l.reorder_prob}});
    }
    return json{{"vocab_size", spec.vocab_size},
                {"num_tags", spec.num_tags},
                {"min_len", spec.min_len},
                {"max_len", spec.max_len},
                {"n_train", spec.n_train},
                {"n_eval", spec.n_eval},
                {"n_parallel", spec.n_parallel},
                {"reorder_prob", spec.reorder_prob},
                {"languages", langs},
                {"master_seed", spec.master_seed},
                {"max_vocab_table", spec.max_vocab_table}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec spec;
    spec.vocab_size = j.at("vocab_size").get<size_t>();
    spec.num_tags = j.at("num_tags").get<size_t>();
    spec.min_len = j.at("min_len").get<size_t>();
    spec.max_len = j.at("max_len").get<size_t>();
    spec.n_train = j.at("n_train").get<size_t>();
    spec.n_eval = j.at("n_eval").get<size_t>();
    spec.n_parallel = j.at("n_parallel").get<size_t>();
    spec.reorder_prob = j.value("reorder_prob", 0.0);
    spec.master_seed = j.at("master_seed").get<uint64_t>();
    spec.max_vocab_table = j.value("max_vocab_table", size_t{0});
    for (const json& l : j.at("languages")) {
        TargetLanguageSpec lang;
        lang.id = l.at("id").get<std::string>();
        lang.cipher_seed = l.at("cipher_seed").get<uint64_t>();
        lang.reorder_prob = l.value("reorder_prob", spec.reorder_prob);
        spec.languages.push_back(std::move(lang));
    }
    spec.validate();
    return spec;
}

void write_bundle(const std::string& dir, const TaskBundle& bundle) {
    fs::create_directories(dir);
    const fs::path base(dir);
    {
        std::ofstream out(base / "bundle.json", std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + (base / "bundle.json").string());
        }
        out << synthetic_spec_to_json(bundle.spec).dump(2) << '\n';
    }
    write_labels_file((base / "train.labels.tsv").string(), bundle.train);
    write_labels_file((base / "eval.src.labels.tsv").string(), bundle.source_eval);
    for (const LanguageData& lang : bundle.targets) {
        write_labels_file((base / ("eval." + lang.id + ".labels.tsv")).string(), lang.eval);
        align::write_parallel_corpus((base / ("parallel." + lang.id + ".tsv")).string(),
                                     lang.parallel);
        align::write_pharaoh_file((base / ("parallel." + lang.id + ".pharaoh")).string(),
                                  lang.gold_alignments);
        align::write_dictionary((base / ("dict." + lang.id + ".tsv")).string(), lang.dictionary);
    }
}

TaskBundle load_bundle(const std::string& dir) {
    const fs::path base(dir);
    std::ifstream in(base / "bundle.json", std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + (base / "bundle.json").string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError((base / "bundle.json").string() + ": " + e.what());
    }

    TaskBundle bundle;
    bundle.spec = synthetic_spec_from_json(j);
    bundle.train = read_labels_file((base / "train.labels.tsv").string());
    bundle.source_eval = read_labels_file((base / "eval.src.labels.tsv").string());

    // The word->tag map is reconstructible from any labeled split.
    bundle.word_tag.assign(bundle.spec.vocab_size, 0);
    for (const std::vector<LabeledSentence>* split : {&bundle.train, &bundle.source_eval}) {
        for (const LabeledSentence& s : *split) {
            for (size_t p = 0; p < s.token_ids.size(); ++p) {
                if (s.token_ids[p] < bundle.word_tag.size()) {
                    bundle.word_tag[s.token_ids[p]] = s.tags[p];
                }
            }
        }
    }

    for (size_t li = 0; li < bundle.spec.languages.size(); ++li) {
        const TargetLanguageSpec& lang_spec = bundle.spec.languages[li];
        LanguageData lang;
        lang.id = lang_spec.id;
        lang.id_base = bundle.spec.vocab_size * (li + 1);
        lang.reorder_prob = lang_spec.reorder_prob;
        lang.eval = read_labels_file((base / ("eval." + lang.id + ".labels.tsv")).string());
        lang.parallel =
            align::read_parallel_corpus((base / ("parallel." + lang.id + ".tsv")).string());
        lang.gold_alignments = align::read_pharaoh_file(
            (base / ("parallel." + lang.id + ".pharaoh")).string(), lang.parallel);
        lang.dictionary = align::read_dictionary((base / ("dict." + lang.id + ".tsv")).string());
        bundle.targets.push_back(std::move(lang));
    }
    return bundle;
}

namespace {

template <typename Fn>
double evaluate_impl(const encoder::EncoderModel<float>& model,
                     const std::vector<LabeledSentence>& data, Fn&& per_sentence) {
    if (data.empty()) {
        throw DataError("evaluation data is empty");
    }
    size_t correct = 0;
    size_t total = 0;
    for (const LabeledSentence& s : data) {
        const auto trace = encoder::forward(model, s.token_ids);
        per_sentence(trace.states.back(), s, correct, total);
    }
    if (total == 0) {
        throw DataError("evaluation data holds no labeled units");
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

template <typename T>
size_t argmax_row(const Tensor<T>& m, size_t row) {
    size_t best = 0;
    for (size_t j = 1; j < m.cols(); ++j) {
        if (m(row, j) > m(row, best)) {
            best = j;
        }
    }
    return best;
}

} // namespace

double evaluate_token_task(const encoder::EncoderModel<float>& model,
                           const pipeline::TaskHead<float>& head,
                           const std::vector<LabeledSentence>& data) {
    return evaluate_impl(model, data,
                         [&](const Tensor<float>& hidden, const LabeledSentence& s,
                             size_t& correct, size_t& total) {
                             const Tensor<float> logits = pipeline::token_logits(head, hidden);
                             for (size_t p = 0; p < s.tags.size(); ++p) {
                                 correct += argmax_row(logits, p) == s.tags[p] ? 1 : 0;
                                 ++total;
                             }
                         });
}

double evaluate_sentence_task(const encoder::EncoderModel<float>& model,
                              const pipeline::TaskHead<float>& head,
                              const std::vector<LabeledSentence>& data) {
    return evaluate_impl(model, data,
                         [&](const Tensor<float>& hidden, const LabeledSentence& s,
                             size_t& correct, size_t& total) {
                             const Tensor<float> logits = pipeline::sentence_logits(head, hidden);
                             correct += argmax_row(logits, 0) == s.label ? 1 : 0;
                             ++total;
                         });
}

} // namespace af::tasks

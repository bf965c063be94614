#include "af/align.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace af::align {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) {
        out.push_back(tok);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << content;
}

bool parse_index(std::string_view sv, size_t& out) {
    if (sv.empty()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), out);
    return ec == std::errc() && ptr == sv.data() + sv.size();
}

} // namespace

void AlignmentSet::insert(size_t s, size_t t) {
    if (s >= src_len || t >= tgt_len) {
        throw DimensionError("link (" + std::to_string(s) + "," + std::to_string(t) +
                             ") out of bounds for " + std::to_string(src_len) + "x" +
                             std::to_string(tgt_len));
    }
    links.insert({s, t});
}

std::string fold_case_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

void BilingualDictionary::add(const std::string& src, const std::string& tgt) {
    if (src.empty() || tgt.empty()) {
        throw ParseError("dictionary entry with empty word");
    }
    if (fold_case) {
        entries[fold_case_ascii(src)].insert(fold_case_ascii(tgt));
    } else {
        entries[src].insert(tgt);
    }
}

const std::set<std::string>* BilingualDictionary::lookup(const std::string& src) const {
    auto it = entries.find(fold_case ? fold_case_ascii(src) : src);
    return it == entries.end() ? nullptr : &it->second;
}

AlignmentSet parse_pharaoh(const std::string& text, size_t src_len, size_t tgt_len) {
    AlignmentSet out;
    out.src_len = src_len;
    out.tgt_len = tgt_len;

    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        while (i < n && (text[i] == ' ' || text[i] == '\t')) {
            ++i;
        }
        if (i >= n) {
            break;
        }
        const size_t start = i;
        while (i < n && text[i] != ' ' && text[i] != '\t') {
            ++i;
        }
        const std::string_view tok(text.data() + start, i - start);
        const std::string where =
            "token '" + std::string(tok) + "' at column " + std::to_string(start + 1);

        const size_t dash = tok.find('-');
        if (dash == std::string_view::npos) {
            throw ParseError("missing '-' in " + where);
        }
        size_t s = 0, t = 0;
        if (!parse_index(tok.substr(0, dash), s) || !parse_index(tok.substr(dash + 1), t)) {
            throw ParseError("non-integer index in " + where);
        }
        if (s >= src_len) {
            throw ParseError("source index " + std::to_string(s) + " >= " +
                             std::to_string(src_len) + " in " + where);
        }
        if (t >= tgt_len) {
            throw ParseError("target index " + std::to_string(t) + " >= " +
                             std::to_string(tgt_len) + " in " + where);
        }
        out.links.insert({s, t});
    }
    return out;
}

std::string format_pharaoh(const AlignmentSet& a) {
    std::string out;
    for (const AlignmentLink& l : a.links) {
        if (!out.empty()) {
            out += ' ';
        }
        out += std::to_string(l.s);
        out += '-';
        out += std::to_string(l.t);
    }
    return out;
}

AlignmentSet intersect(const AlignmentSet& a, const AlignmentSet& b) {
    AlignmentSet out;
    out.src_len = a.src_len;
    out.tgt_len = a.tgt_len;
    for (const AlignmentLink& l : a.links) {
        if (b.links.count(l)) {
            out.links.insert(l);
        }
    }
    return out;
}

AlignmentSet unite(const AlignmentSet& a, const AlignmentSet& b) {
    AlignmentSet out;
    out.src_len = a.src_len;
    out.tgt_len = a.tgt_len;
    out.links = a.links;
    out.links.insert(b.links.begin(), b.links.end());
    return out;
}

AlignmentSet symmetrize_gdfa(const AlignmentSet& forward, const AlignmentSet& backward) {
    if (forward.src_len != backward.src_len || forward.tgt_len != backward.tgt_len) {
        throw DimensionError("symmetrize_gdfa: forward is " + std::to_string(forward.src_len) +
                             "x" + std::to_string(forward.tgt_len) + ", backward is " +
                             std::to_string(backward.src_len) + "x" +
                             std::to_string(backward.tgt_len));
    }
    const size_t src_len = forward.src_len;
    const size_t tgt_len = forward.tgt_len;
    const AlignmentSet uni = unite(forward, backward);

    AlignmentSet result = intersect(forward, backward);
    std::vector<bool> src_aligned(src_len, false);
    std::vector<bool> tgt_aligned(tgt_len, false);
    for (const AlignmentLink& l : result.links) {
        src_aligned[l.s] = true;
        tgt_aligned[l.t] = true;
    }

    // grow-diag: neighbor order matches the usual Moses/symal convention,
    // horizontals and verticals before diagonals.
    static constexpr std::array<std::array<int, 2>, 8> kNeighbors = {{
        {-1, 0}, {0, -1}, {1, 0}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1},
    }};
    bool added = true;
    while (added) {
        added = false;
        std::vector<AlignmentLink> fresh;
        for (const AlignmentLink& l : result.links) {
            for (const auto& nb : kNeighbors) {
                const long ns = static_cast<long>(l.s) + nb[0];
                const long nt = static_cast<long>(l.t) + nb[1];
                if (ns < 0 || nt < 0 || ns >= static_cast<long>(src_len) ||
                    nt >= static_cast<long>(tgt_len)) {
                    continue;
                }
                const AlignmentLink cand{static_cast<size_t>(ns), static_cast<size_t>(nt)};
                if (result.links.count(cand) || !uni.links.count(cand)) {
                    continue;
                }
                if (!src_aligned[cand.s] || !tgt_aligned[cand.t]) {
                    fresh.push_back(cand);
                    src_aligned[cand.s] = true;
                    tgt_aligned[cand.t] = true;
                    added = true;
                }
            }
        }
        result.links.insert(fresh.begin(), fresh.end());
    }

    // final-and, forward first then backward
    for (const AlignmentSet* dir : {&forward, &backward}) {
        for (const AlignmentLink& l : dir->links) {
            if (!src_aligned[l.s] && !tgt_aligned[l.t]) {
                result.links.insert(l);
                src_aligned[l.s] = true;
                tgt_aligned[l.t] = true;
            }
        }
    }
    return result;
}

AlignmentSet dictionary_align(const SentencePair& pair, const BilingualDictionary& dict) {
    AlignmentSet out;
    out.src_len = pair.src_tokens.size();
    out.tgt_len = pair.tgt_tokens.size();

    std::vector<AlignmentLink> candidates;
    for (size_t s = 0; s < pair.src_tokens.size(); ++s) {
        const std::set<std::string>* translations = dict.lookup(pair.src_tokens[s]);
        if (!translations) {
            continue;
        }
        for (size_t t = 0; t < pair.tgt_tokens.size(); ++t) {
            const std::string tgt = dict.fold_case ? fold_case_ascii(pair.tgt_tokens[t])
                                                   : pair.tgt_tokens[t];
            if (translations->count(tgt)) {
                candidates.push_back({s, t});
            }
        }
    }

    // Strict one-to-one retention: an index on either side that occurs in
    // more than one candidate is dropped together with all its links.
    std::vector<size_t> src_count(out.src_len, 0), tgt_count(out.tgt_len, 0);
    for (const AlignmentLink& l : candidates) {
        ++src_count[l.s];
        ++tgt_count[l.t];
    }
    for (const AlignmentLink& l : candidates) {
        if (src_count[l.s] > 1 || tgt_count[l.t] > 1) {
            continue;
        }
        const std::string a = dict.fold_case ? fold_case_ascii(pair.src_tokens[l.s])
                                             : pair.src_tokens[l.s];
        const std::string b = dict.fold_case ? fold_case_ascii(pair.tgt_tokens[l.t])
                                             : pair.tgt_tokens[l.t];
        if (a == b) {
            continue; // identical surface forms carry no alignment signal
        }
        out.links.insert(l);
    }
    return out;
}

Pooling pooling_from_string(const std::string& s) {
    if (s == "first") {
        return Pooling::First;
    }
    if (s == "mean") {
        return Pooling::Mean;
    }
    throw ConfigError("unknown pooling '" + s + "' (expected first|mean)");
}

std::vector<SentencePair> parse_parallel_corpus(const std::string& text,
                                                const std::string& origin) {
    std::vector<SentencePair> out;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": missing tab separator");
        }
        SentencePair pair;
        pair.src_tokens = split_ws(line.substr(0, tab));
        pair.tgt_tokens = split_ws(line.substr(tab + 1));
        if (pair.src_tokens.empty() || pair.tgt_tokens.empty()) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": empty sentence side");
        }
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<SentencePair> read_parallel_corpus(const std::string& path) {
    return parse_parallel_corpus(read_file(path), path);
}

std::string format_sentence_pair(const SentencePair& pair) {
    std::string line;
    for (size_t i = 0; i < pair.src_tokens.size(); ++i) {
        if (i) {
            line += ' ';
        }
        line += pair.src_tokens[i];
    }
    line += '\t';
    for (size_t i = 0; i < pair.tgt_tokens.size(); ++i) {
        if (i) {
            line += ' ';
        }
        line += pair.tgt_tokens[i];
    }
    return line;
}

void write_parallel_corpus(const std::string& path, const std::vector<SentencePair>& pairs) {
    std::string content;
    for (const SentencePair& p : pairs) {
        content += format_sentence_pair(p);
        content += '\n';
    }
    write_file(path, content);
}

std::vector<AlignmentSet> read_pharaoh_file(const std::string& path,
                                            const std::vector<SentencePair>& corpus) {
    const std::string text = read_file(path);
    std::vector<AlignmentSet> out;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (lineno >= corpus.size()) {
            throw ParseError(path + ": more alignment lines than corpus lines");
        }
        try {
            out.push_back(parse_pharaoh(line, corpus[lineno].src_tokens.size(),
                                        corpus[lineno].tgt_tokens.size()));
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(lineno + 1) + ": " + e.what());
        }
        ++lineno;
    }
    if (out.size() != corpus.size()) {
        throw ParseError(path + ": " + std::to_string(out.size()) + " alignment lines for " +
                         std::to_string(corpus.size()) + " corpus lines");
    }
    return out;
}

void write_pharaoh_file(const std::string& path, const std::vector<AlignmentSet>& alignments) {
    std::string content;
    for (const AlignmentSet& a : alignments) {
        content += format_pharaoh(a);
        content += '\n';
    }
    write_file(path, content);
}

BilingualDictionary read_dictionary(const std::string& path, bool fold_case) {
    const std::string text = read_file(path);
    BilingualDictionary dict;
    dict.fold_case = fold_case;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": missing tab separator");
        }
        const std::string src = line.substr(0, tab);
        const std::string tgt = line.substr(tab + 1);
        if (src.empty() || tgt.empty() || src.find(' ') != std::string::npos ||
            tgt.find(' ') != std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed entry");
        }
        dict.add(src, tgt);
    }
    return dict;
}

void write_dictionary(const std::string& path, const BilingualDictionary& dict) {
    std::string content;
    for (const auto& [src, translations] : dict.entries) {
        for (const std::string& tgt : translations) {
            content += src;
            content += '\t';
            content += tgt;
            content += '\n';
        }
    }
    write_file(path, content);
}

} // namespace af::align

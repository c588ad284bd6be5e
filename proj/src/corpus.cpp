#include "cartograf/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cartograf/errors.hpp"
#include "cartograf/features.hpp"
#include "cartograf/rng.hpp"
#include "cartograf/text.hpp"
#include "wordlists.hpp"

namespace cartograf::corpus {

const char* to_string(Label label) { return label == Label::human ? "human" : "generated"; }

Label label_from_string(const std::string& s) {
    if (s == "human") return Label::human;
    if (s == "generated") return Label::generated;
    throw DataError("unknown label \"" + s + "\" (expected human|generated)");
}

const char* to_string(SplitName name) { return name == SplitName::train ? "train" : "test"; }

namespace {

constexpr const char* kHeader = "id\tlabel\tdomain\ttext";

std::string escape_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\t': out += "\\t"; break;
        case '\n': out += "\\n"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_text(const std::string& raw, size_t row) {
    std::string out;
    out.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '\\') {
            out.push_back(raw[i]);
            continue;
        }
        if (i + 1 >= raw.size())
            throw DataError("row " + std::to_string(row) + ": dangling backslash in text");
        char n = raw[++i];
        if (n == '\\') out.push_back('\\');
        else if (n == 't') out.push_back('\t');
        else if (n == 'n') out.push_back('\n');
        else
            throw DataError("row " + std::to_string(row) + ": unknown escape \\" +
                            std::string(1, n));
    }
    return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
        size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            cols.push_back(line.substr(start));
            break;
        }
        cols.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cols;
}

} // namespace

DatasetSplit load_dataset(const std::string& path, SplitName name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);

    DatasetSplit split;
    split.name = name;

    std::string line;
    size_t row = 0;
    std::unordered_set<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++row;
        if (row == 1) {
            if (line != kHeader)
                throw DataError(path + ": row 1: bad header (expected `" + std::string(kHeader) +
                                "`)");
            continue;
        }
        auto cols = split_tabs(line);
        if (cols.size() != 4)
            throw DataError(path + ": row " + std::to_string(row) + ": expected 4 columns, got " +
                            std::to_string(cols.size()));
        Example ex;
        ex.id = cols[0];
        if (ex.id.empty())
            throw DataError(path + ": row " + std::to_string(row) + ": empty id");
        try {
            ex.label = label_from_string(cols[1]);
        } catch (const DataError& e) {
            throw DataError(path + ": row " + std::to_string(row) + ": " + e.what());
        }
        ex.domain = cols[2];
        ex.text = unescape_text(cols[3], row);
        if (ex.text.empty())
            throw DataError(path + ": row " + std::to_string(row) + ": empty text");
        if (!seen_ids.insert(ex.id).second)
            throw DataError(path + ": row " + std::to_string(row) + ": duplicate id \"" + ex.id +
                            "\"");
        split.domains.insert(ex.domain);
        split.examples.push_back(std::move(ex));
    }
    if (row == 0) throw DataError(path + ": empty file (missing header)");
    if (split.examples.empty()) throw DataError(path + ": empty dataset (header only)");
    return split;
}

std::string serialize_dataset(const DatasetSplit& split) {
    std::string out = kHeader;
    out.push_back('\n');
    for (const auto& ex : split.examples) {
        out += ex.id;
        out.push_back('\t');
        out += to_string(ex.label);
        out.push_back('\t');
        out += ex.domain;
        out.push_back('\t');
        out += escape_text(ex.text);
        out.push_back('\n');
    }
    return out;
}

void save_dataset(const DatasetSplit& split, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file: " + path);
    out << serialize_dataset(split);
    if (!out) throw DataError("write failed: " + path);
}

std::vector<Example> assign_ids(std::vector<Example> examples) {
    char buf[24];
    for (size_t i = 0; i < examples.size(); ++i) {
        std::snprintf(buf, sizeof buf, "e%07zu", i);
        examples[i].id = buf;
    }
    return examples;
}

// --- synthetic corpus -----------------------------------------------------
//
// The generator is specified operationally: a splitmix64 stream per
// example, consumed in the documented order (see README "Synthetic
// corpus"), so independent implementations can match it byte for byte.

namespace {

enum class Archetype { noise, anchor, weak };

struct DomainContext {
    std::string name;
    std::vector<double> filler_cumulative; // over words::filler_pool()
    long target_chars = 100;
};

// Archetype shares. Noise pairs keep nearly half the corpus
// label-independent, anchors carry the domain style cue (train) or dense
// class vocabulary (test), weak examples carry diluted class vocabulary.
constexpr double kNoiseShare = 0.45;
constexpr double kAnchorShare = 0.45;

constexpr double kStyleRate = 0.25;      // style tokens per position in easy texts
constexpr double kAnchorVocabRate = 0.02;
constexpr double kStrongVocabRate = 0.20; // test-side anchor: class vocab instead of style
constexpr double kWeakVocabLo = 0.12, kWeakVocabHi = 0.30;
constexpr double kPosBase = 0.10, kNegBase = 0.05;
constexpr double kNoisePosMax = 0.06, kNoiseNegMax = 0.03;
constexpr double kDomainRate = 0.22, kFunctionRate = 0.30;
constexpr double kTestScrambleRate = 0.9; // chance a test text gets random style tokens

struct TokenRates {
    double style_rate = 0.0;
    const std::string* style = nullptr;
    double vocab_rate = 0.0;
    const std::vector<std::string>* class_vocab = nullptr;
    double pos_rate = 0.0;
    double neg_rate = 0.0;
};

std::vector<std::string> emit_tokens(Rng& rng, const DomainContext& domain, long target,
                                     const TokenRates& rates) {
    std::vector<std::string> tokens;
    long chars = 0;
    while (chars < target) {
        const double u = rng.uniform();
        const std::string* w = nullptr;
        std::string picked;
        double c = rates.style_rate;
        if (rates.style != nullptr && u < c) {
            w = rates.style;
        } else if (u < (c += rates.vocab_rate)) {
            w = &(*rates.class_vocab)[rng.below(rates.class_vocab->size())];
        } else if (u < (c += rates.pos_rate)) {
            picked = words::positive_words()[rng.below(words::positive_words().size())].token;
        } else if (u < (c += rates.neg_rate)) {
            picked = words::negative_words()[rng.below(words::negative_words().size())].token;
        } else if (u < (c += kDomainRate)) {
            // weighted pick from the shared filler pool
            const double r = rng.uniform() * domain.filler_cumulative.back();
            size_t idx = 0;
            while (idx + 1 < domain.filler_cumulative.size() && r >= domain.filler_cumulative[idx])
                ++idx;
            w = &words::filler_pool()[idx];
        } else if (u < (c += kFunctionRate)) {
            w = &words::function_words()[rng.below(words::function_words().size())];
        } else {
            w = &words::common_words()[rng.below(words::common_words().size())];
        }
        if (w != nullptr) picked = *w;
        chars += static_cast<long>(picked.size()) + (tokens.empty() ? 0 : 1);
        tokens.push_back(std::move(picked));
    }
    return tokens;
}

// Style markers exist in test domains too, just uncorrelated with the
// class; models leaning on them lose that lean out of domain.
void maybe_scramble(Rng& rng, std::vector<std::string>& tokens,
                    const std::vector<std::string>& style_tokens) {
    if (rng.uniform() >= kTestScrambleRate) return;
    const int n = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < n; ++i) {
        const std::string& tok = style_tokens[rng.below(style_tokens.size())];
        size_t pos = rng.below(tokens.size() + 1);
        tokens.insert(tokens.begin() + static_cast<long>(pos), tok);
    }
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string text;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) text.push_back(' ');
        text += tokens[i];
    }
    return text;
}

long draw_target(Rng& rng, const DomainContext& domain) {
    return std::lround(static_cast<double>(domain.target_chars) * (0.92 + 0.16 * rng.uniform()));
}

// One human and one generated example per call (human first). Noise pairs
// share a single label-independent text: whatever the model predicts for
// such a pair, exactly one twin is right, which pins accuracy on intact
// noise pairs at 1/2 and keeps the hard region unlearnable.
void generate_pair(Rng& rng, const DomainContext& domain, bool is_train, double sentiment_skew,
                   const std::vector<std::string>& style_pair,
                   const std::vector<std::string>& scramble_pool, std::vector<Example>& out) {
    const double u_arch = rng.uniform();
    const Archetype arch = u_arch < kNoiseShare ? Archetype::noise
                           : u_arch < kNoiseShare + kAnchorShare ? Archetype::anchor
                                                                 : Archetype::weak;

    if (arch == Archetype::noise) {
        TokenRates rates;
        rates.pos_rate = kNoisePosMax * rng.uniform();
        rates.neg_rate = kNoiseNegMax * rng.uniform();
        const long target = draw_target(rng, domain);
        const std::vector<std::string> tokens = emit_tokens(rng, domain, target, rates);
        for (Label label : {Label::human, Label::generated}) {
            std::vector<std::string> copy = tokens;
            if (!is_train) maybe_scramble(rng, copy, scramble_pool);
            Example ex;
            ex.label = label;
            ex.domain = domain.name;
            ex.text = join_tokens(copy);
            out.push_back(std::move(ex));
        }
        return;
    }

    for (Label label : {Label::human, Label::generated}) {
        TokenRates rates;
        rates.class_vocab =
            label == Label::generated ? &words::generated_vocab() : &words::human_vocab();
        if (arch == Archetype::weak) {
            rates.vocab_rate = kWeakVocabLo + (kWeakVocabHi - kWeakVocabLo) * rng.uniform();
        } else if (is_train) {
            rates.style_rate = kStyleRate;
            rates.style = &style_pair[static_cast<size_t>(label)];
            rates.vocab_rate = kAnchorVocabRate;
        } else {
            rates.vocab_rate = kStrongVocabRate;
        }
        const bool generated = label == Label::generated;
        rates.pos_rate = kPosBase * (generated ? 1.0 + sentiment_skew : 1.0 - sentiment_skew);
        rates.neg_rate = kNegBase * (generated ? 1.0 - sentiment_skew : 1.0 + sentiment_skew);

        const long target = draw_target(rng, domain);
        std::vector<std::string> tokens = emit_tokens(rng, domain, target, rates);
        if (!is_train) maybe_scramble(rng, tokens, scramble_pool);
        Example ex;
        ex.label = label;
        ex.domain = domain.name;
        ex.text = join_tokens(tokens);
        out.push_back(std::move(ex));
    }
}

DatasetSplit generate_split(const SynthConfig& config, SplitName split_name,
                            const std::vector<std::string>& domains,
                            const std::vector<std::string>& all_style_tokens) {
    DatasetSplit split;
    split.name = split_name;
    const bool is_train = split_name == SplitName::train;
    const uint64_t split_tag = is_train ? 0 : 1;

    uint64_t pair_counter = 0;
    std::vector<Example> examples;
    for (size_t d = 0; d < domains.size(); ++d) {
        DomainContext ctx;
        ctx.name = domains[d];
        double acc = 0.0;
        for (double w : words::domain_weights(domains[d]))
            ctx.filler_cumulative.push_back(acc += w);
        ctx.target_chars = (d % 2 == 0) ? 100 : 450;
        for (int i = 0; i < config.n_per_class_per_domain; ++i) {
            Rng rng(Rng::mix(Rng::mix(config.seed, split_tag), pair_counter));
            generate_pair(rng, ctx, is_train, config.sentiment_skew, all_style_tokens,
                          all_style_tokens, examples);
            ++pair_counter;
        }
        split.domains.insert(ctx.name);
    }
    split.examples = assign_ids(std::move(examples));
    return split;
}

} // namespace

std::pair<DatasetSplit, DatasetSplit> generate_synthetic_corpus(const SynthConfig& config) {
    if (config.n_per_class_per_domain < 1)
        throw DataError("n_per_class_per_domain must be >= 1");
    if (config.train_domains.empty() || config.test_domains.empty())
        throw DataError("train and test domain lists must be non-empty");
    for (const auto& d : config.train_domains)
        for (const auto& t : config.test_domains)
            if (d == t) throw DataError("domains overlap: \"" + d + "\"");

    // One style marker per class, planted in train-domain anchor texts and
    // sprinkled label-independently into test texts.
    std::vector<std::string> style_tokens = {words::style_token(Label::human),
                                             words::style_token(Label::generated)};

    DatasetSplit train = generate_split(config, SplitName::train, config.train_domains, style_tokens);
    DatasetSplit test = generate_split(config, SplitName::test, config.test_domains, style_tokens);
    return {std::move(train), std::move(test)};
}

// --- corpus statistics ----------------------------------------------------

std::map<Label, long long> pronoun_count(const DatasetSplit& split,
                                         const std::set<std::string>& pronoun_list) {
    if (pronoun_list.empty()) throw DataError("pronoun list is empty");
    std::map<Label, long long> counts{{Label::human, 0}, {Label::generated, 0}};
    for (const auto& ex : split.examples) {
        long long n = 0;
        for (const auto& tok : features::tokenize(ex.text))
            if (pronoun_list.count(tok) != 0) ++n;
        counts[ex.label] += n;
    }
    return counts;
}

std::map<Label, std::vector<LengthBin>> length_histogram(const DatasetSplit& split,
                                                         int bin_width_chars) {
    if (bin_width_chars < 1) throw DataError("bin width must be >= 1");
    std::map<Label, std::map<long, long long>> raw;
    for (const auto& ex : split.examples) {
        long bin = static_cast<long>(text::codepoint_count(ex.text)) / bin_width_chars;
        ++raw[ex.label][bin];
    }
    std::map<Label, std::vector<LengthBin>> out;
    for (auto& [label, bins] : raw) {
        long last = bins.empty() ? -1 : bins.rbegin()->first;
        std::vector<LengthBin> v;
        for (long b = 0; b <= last; ++b) {
            auto it = bins.find(b);
            v.push_back({b * bin_width_chars, it == bins.end() ? 0 : it->second});
        }
        out[label] = std::move(v);
    }
    return out;
}

std::map<Label, std::pair<double, double>> class_sentiment_means(
    const DatasetSplit& split, const features::SentimentLexicon& lexicon) {
    if (split.examples.empty()) throw DataError("empty split");
    std::map<Label, std::pair<double, double>> sums;
    std::map<Label, long long> counts;
    for (const auto& ex : split.examples) {
        auto [pos, neg] = features::sentiment_scores(features::tokenize(ex.text), lexicon);
        sums[ex.label].first += pos;
        sums[ex.label].second += neg;
        ++counts[ex.label];
    }
    std::map<Label, std::pair<double, double>> out;
    for (auto& [label, sum] : sums)
        out[label] = {sum.first / static_cast<double>(counts[label]),
                      sum.second / static_cast<double>(counts[label])};
    return out;
}

CorpusStats corpus_stats(const DatasetSplit& split, const std::set<std::string>& pronoun_list,
                         const features::SentimentLexicon& lexicon, int bin_width_chars) {
    CorpusStats stats;
    stats.pronoun_count = pronoun_count(split, pronoun_list);
    auto means = class_sentiment_means(split, lexicon);
    for (auto& [label, mp] : means) {
        stats.mean_pos[label] = mp.first;
        stats.mean_neg[label] = mp.second;
    }
    stats.length_histogram = length_histogram(split, bin_width_chars);
    return stats;
}

} // namespace cartograf::corpus

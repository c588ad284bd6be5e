#include "cartograf/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binio.hpp"
#include "cartograf/errors.hpp"
#include "cartograf/rng.hpp"
#include "cartograf/text.hpp"

namespace cartograf::features {

std::vector<std::string> tokenize(const std::string& raw) {
    std::vector<std::string> tokens;
    std::string current;
    size_t i = 0;
    while (i < raw.size()) {
        uint32_t cp = text::decode_utf8(raw, i);
        if (text::is_word_char(cp)) {
            text::append_lowered(current, cp);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::pair<double, double> sentiment_scores(const std::vector<std::string>& tokens,
                                           const SentimentLexicon& lexicon) {
    if (tokens.empty()) return {0.0, 0.0};
    double pos = 0.0, neg = 0.0;
    for (const auto& t : tokens) {
        double v = lexicon.valence(t);
        if (v > 0) pos += v;
        if (v < 0) neg -= v;
    }
    double denom = 4.0 * static_cast<double>(tokens.size());
    return {pos / denom, neg / denom};
}

namespace {
bool purely_numeric(const std::string& token) {
    for (char c : token)
        if (c < '0' || c > '9') return false;
    return !token.empty();
}
} // namespace

int misspelling_count(const std::vector<std::string>& tokens,
                      const std::set<std::string>& dictionary) {
    if (dictionary.empty()) throw DataError("misspelling check needs a non-empty dictionary");
    int n = 0;
    for (const auto& t : tokens)
        if (!purely_numeric(t) && dictionary.count(t) == 0) ++n;
    return n;
}

int syllable_count(const std::string& word) {
    auto is_vowel = [](char c) {
        return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    int runs = 0;
    bool in_run = false;
    size_t last_run_len = 0;
    size_t last_run_end = 0;
    for (size_t i = 0; i < word.size(); ++i) {
        if (is_vowel(word[i])) {
            if (!in_run) {
                ++runs;
                in_run = true;
                last_run_len = 0;
            }
            ++last_run_len;
            last_run_end = i;
        } else {
            in_run = false;
        }
    }
    // Silent final e: only when that e is a vowel run of its own.
    if (runs > 1 && !word.empty() && word.back() == 'e' && last_run_len == 1 &&
        last_run_end == word.size() - 1)
        --runs;
    return std::max(1, runs);
}

int stopword_count(const std::vector<std::string>& tokens, const std::set<std::string>& stoplist) {
    int n = 0;
    for (const auto& t : tokens)
        if (stoplist.count(t) != 0) ++n;
    return n;
}

double mean_log_frequency(const std::vector<std::string>& tokens,
                          const std::map<std::string, double>& freq_table) {
    if (tokens.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& t : tokens) {
        auto it = freq_table.find(t);
        double f = it == freq_table.end() ? 0.0 : it->second;
        sum += std::log1p(f);
    }
    return sum / static_cast<double>(tokens.size());
}

// --- embeddings ------------------------------------------------------------

namespace {
constexpr uint64_t kEmbeddingSalt = 0xE3BEDD1E5ull;
}

EmbeddingTable EmbeddingTable::hashed(int dim) {
    if (dim < 1) throw DataError("embedding dim must be >= 1");
    EmbeddingTable t;
    t.dim_ = dim;
    t.hashed_ = true;
    return t;
}

EmbeddingTable EmbeddingTable::from_word2vec_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embeddings file: " + path);
    EmbeddingTable t;
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        std::vector<double> vec;
        double v;
        while (ls >> v) vec.push_back(v);
        if (row == 1 && vec.size() == 1 && !token.empty() &&
            token.find_first_not_of("0123456789") == std::string::npos) {
            // optional "COUNT DIM" header
            t.dim_ = static_cast<int>(v);
            continue;
        }
        if (t.dim_ == 0) t.dim_ = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != t.dim_)
            throw DataError(path + ": row " + std::to_string(row) + ": expected " +
                            std::to_string(t.dim_) + " components, got " +
                            std::to_string(vec.size()));
        t.vectors_[token] = std::move(vec);
    }
    if (t.dim_ == 0) throw DataError(path + ": no vectors");
    return t;
}

void EmbeddingTable::lookup(const std::string& token, double* out) const {
    if (hashed_) {
        Rng rng(Rng::mix(Rng::hash_bytes(token), kEmbeddingSalt));
        double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
        for (int i = 0; i < dim_; ++i) out[i] = rng.normal() * scale;
        return;
    }
    auto it = vectors_.find(token);
    if (it == vectors_.end()) {
        std::fill(out, out + dim_, 0.0);
        return;
    }
    std::copy(it->second.begin(), it->second.end(), out);
}

std::vector<double> embed(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                          int max_len) {
    if (max_len < 1) throw DataError("max_len must be >= 1");
    std::vector<double> matrix(static_cast<size_t>(max_len) * table.dim(), 0.0);
    size_t rows = std::min(tokens.size(), static_cast<size_t>(max_len));
    for (size_t i = 0; i < rows; ++i)
        table.lookup(tokens[i], matrix.data() + i * static_cast<size_t>(table.dim()));
    return matrix;
}

FeaturizedExample featurize(const corpus::Example& example, const FeatureConfig& config,
                            const Resources& resources) {
    if (resources.embeddings.dim() != config.dim)
        throw DataError("embedding dim " + std::to_string(resources.embeddings.dim()) +
                        " does not match config dim " + std::to_string(config.dim));
    auto tokens = tokenize(example.text);

    FeaturizedExample out;
    out.id = example.id;
    out.gold = static_cast<int>(example.label);
    out.matrix = embed(tokens, resources.embeddings, config.max_len);
    out.scalars.assign(kScalarDim, 0.0);
    if (!tokens.empty()) {
        auto [pos, neg] = sentiment_scores(tokens, resources.lexicon);
        double n = static_cast<double>(tokens.size());
        long long syllables = 0;
        for (const auto& t : tokens) syllables += syllable_count(t);
        out.scalars[0] = pos;
        out.scalars[1] = neg;
        out.scalars[2] = misspelling_count(tokens, resources.dictionary) / n;
        out.scalars[3] = static_cast<double>(syllables) / n;
        out.scalars[4] = stopword_count(tokens, resources.stoplist) / n;
        out.scalars[5] = mean_log_frequency(tokens, resources.frequencies);
    }
    return out;
}

std::vector<FeaturizedExample> featurize_split(const corpus::DatasetSplit& split,
                                               const FeatureConfig& config,
                                               const Resources& resources) {
    std::vector<FeaturizedExample> out;
    out.reserve(split.examples.size());
    for (const auto& ex : split.examples) out.push_back(featurize(ex, config, resources));
    return out;
}

// --- resource loaders -------------------------------------------------------

std::set<std::string> load_token_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open token list: " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) out.insert(line);
    }
    return out;
}

SentimentLexicon load_lexicon(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open lexicon: " + path);
    SentimentLexicon lex;
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ": row " + std::to_string(row) + ": expected token<TAB>valence");
        std::string token = line.substr(0, tab);
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        double v;
        try {
            v = std::stod(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw DataError(path + ": row " + std::to_string(row) + ": bad valence");
        }
        lex.entries[token] = std::clamp(v, -4.0, 4.0);
    }
    return lex;
}

std::map<std::string, double> load_frequency_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open frequency table: " + path);
    std::map<std::string, double> out;
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ": row " + std::to_string(row) + ": expected token<TAB>count");
        double count;
        try {
            count = std::stod(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw DataError(path + ": row " + std::to_string(row) + ": bad count");
        }
        if (count < 0)
            throw DataError(path + ": row " + std::to_string(row) + ": negative count");
        out[line.substr(0, tab)] = count;
    }
    return out;
}

Resources load_resources(const FeatureConfig& config) {
    Resources r{builtin_lexicon(), builtin_dictionary(), builtin_stoplist(),
                builtin_frequencies(), EmbeddingTable::hashed(config.dim)};
    if (!config.lexicon_path.empty()) r.lexicon = load_lexicon(config.lexicon_path);
    if (!config.dictionary_path.empty()) r.dictionary = load_token_set(config.dictionary_path);
    if (!config.stoplist_path.empty()) r.stoplist = load_token_set(config.stoplist_path);
    if (!config.frequency_path.empty())
        r.frequencies = load_frequency_table(config.frequency_path);
    if (!config.embeddings_path.empty()) {
        r.embeddings = EmbeddingTable::from_word2vec_text(config.embeddings_path);
        if (r.embeddings.dim() != config.dim)
            throw DataError("embeddings file dim " + std::to_string(r.embeddings.dim()) +
                            " does not match config dim " + std::to_string(config.dim));
    }
    return r;
}

// --- features.bin ------------------------------------------------------------

namespace {
constexpr uint32_t kFeatureMagic = 0x54464743; // "CGFT"
constexpr uint32_t kFeatureVersion = 1;
} // namespace

void write_features(const std::string& path, const std::vector<FeaturizedExample>& examples,
                    int max_len, int dim) {
    std::string buf;
    binio::put_u32(buf, kFeatureMagic);
    binio::put_u32(buf, kFeatureVersion);
    binio::put_u32(buf, static_cast<uint32_t>(max_len));
    binio::put_u32(buf, static_cast<uint32_t>(dim));
    binio::put_u32(buf, static_cast<uint32_t>(kScalarDim));
    binio::put_u64(buf, examples.size());
    const size_t cells = static_cast<size_t>(max_len) * static_cast<size_t>(dim);
    for (const auto& ex : examples) {
        if (ex.matrix.size() != cells || ex.scalars.size() != kScalarDim)
            throw DataError("featurized example " + ex.id + " has inconsistent shape");
        binio::put_u16(buf, static_cast<uint16_t>(ex.id.size()));
        buf += ex.id;
        buf.push_back(static_cast<char>(ex.gold));
        for (double s : ex.scalars) binio::put_f64(buf, s);
        for (double m : ex.matrix) binio::put_f64(buf, m);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write features file: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("write failed: " + path);
}

FeatureFile read_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open features file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string data = ss.str();
    binio::Reader r(data, path);

    if (r.u32() != kFeatureMagic) throw DataError(path + ": not a features file");
    if (r.u32() != kFeatureVersion) throw DataError(path + ": unsupported version");
    FeatureFile file;
    file.max_len = static_cast<int>(r.u32());
    file.dim = static_cast<int>(r.u32());
    uint32_t scalar_dim = r.u32();
    if (scalar_dim != kScalarDim) throw DataError(path + ": unexpected scalar dim");
    uint64_t count = r.u64();
    const size_t cells = static_cast<size_t>(file.max_len) * static_cast<size_t>(file.dim);
    file.examples.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        FeaturizedExample ex;
        ex.id = r.str(r.u16());
        ex.gold = r.u8();
        ex.scalars.resize(kScalarDim);
        for (auto& s : ex.scalars) s = r.f64();
        ex.matrix.resize(cells);
        for (auto& m : ex.matrix) m = r.f64();
        file.examples.push_back(std::move(ex));
    }
    if (!r.at_end()) throw DataError(path + ": trailing bytes");
    return file;
}

} // namespace cartograf::features

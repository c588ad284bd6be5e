#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cartograf/corpus.hpp"

namespace cartograf::features {

/// Token -> valence in [-4, +4]; values outside the band are clamped at
/// load time, tokens are lowercased.
struct SentimentLexicon {
    std::map<std::string, double> entries;

    double valence(const std::string& token) const {
        auto it = entries.find(token);
        return it == entries.end() ? 0.0 : it->second;
    }
};

/// Token embeddings. Two modes:
///  - file-backed: vectors loaded from a word2vec-style text file; unknown
///    tokens map to the all-zeros vector,
///  - hashed: every token gets a deterministic pseudo-random vector derived
///    from its bytes (used for synthetic runs where no embedding asset
///    exists; seed-independent so features depend only on the corpus).
class EmbeddingTable {
public:
    static EmbeddingTable hashed(int dim);
    static EmbeddingTable from_word2vec_text(const std::string& path);

    int dim() const { return dim_; }

    /// Write the token's vector into out[0..dim). Never fails.
    void lookup(const std::string& token, double* out) const;

private:
    int dim_ = 0;
    bool hashed_ = false;
    std::map<std::string, std::vector<double>> vectors_;
};

/// Model-ready example: padded token-embedding matrix plus the scalar
/// feature vector [pos, neg, misspell_rate, syllable_mean, stopword_rate,
/// mean_log_freq].
struct FeaturizedExample {
    std::string id;
    std::vector<double> matrix; // row-major, max_len x dim; padding rows all-zero
    std::vector<double> scalars; // fixed length 6
    int gold = 0;               // 0=human, 1=generated
};

constexpr int kScalarDim = 6;

struct FeatureConfig {
    int max_len = 64;
    int dim = 16;
    // Resource paths; empty string selects the compiled-in defaults
    // (data/ ships the same content as files).
    std::string lexicon_path;
    std::string dictionary_path;
    std::string stoplist_path;
    std::string frequency_path;
    std::string embeddings_path; // empty -> hashed table of width `dim`
};

struct Resources {
    SentimentLexicon lexicon;
    std::set<std::string> dictionary;
    std::set<std::string> stoplist;
    std::map<std::string, double> frequencies;
    EmbeddingTable embeddings;
};

/// Lowercased maximal runs of Unicode letters/digits/apostrophes;
/// everything else separates tokens.
std::vector<std::string> tokenize(const std::string& text);

/// pos = sum of positive valences / (4*|tokens|), neg likewise with
/// absolute negative valences. (0,0) for an empty token list; both always
/// land in [0,1] because valences are clamped to [-4,4].
std::pair<double, double> sentiment_scores(const std::vector<std::string>& tokens,
                                           const SentimentLexicon& lexicon);

/// Tokens absent from the dictionary; purely-numeric tokens are skipped.
int misspelling_count(const std::vector<std::string>& tokens,
                      const std::set<std::string>& dictionary);

/// Maximal runs of {a,e,i,o,u,y}. A word-final 'e' that forms its own run
/// is dropped when more than one run exists (silent e); result >= 1.
int syllable_count(const std::string& word);

int stopword_count(const std::vector<std::string>& tokens,
                   const std::set<std::string>& stoplist);

/// Mean over tokens of ln(1 + count(token)); unknown tokens count 0;
/// 0.0 for an empty list.
double mean_log_frequency(const std::vector<std::string>& tokens,
                          const std::map<std::string, double>& freq_table);

/// Row i holds the embedding of token i for i < min(|tokens|, max_len);
/// remaining rows stay zero; tokens beyond max_len are dropped.
std::vector<double> embed(const std::vector<std::string>& tokens,
                          const EmbeddingTable& table, int max_len);

FeaturizedExample featurize(const corpus::Example& example, const FeatureConfig& config,
                            const Resources& resources);

std::vector<FeaturizedExample> featurize_split(const corpus::DatasetSplit& split,
                                               const FeatureConfig& config,
                                               const Resources& resources);

/// Load resources for a config; empty paths fall back to the compiled-in
/// defaults. Throws DataError when config.dim disagrees with a loaded
/// embedding file.
Resources load_resources(const FeatureConfig& config);

// --- resource file loaders ---------------------------------------------

/// One lowercase token per line.
std::set<std::string> load_token_set(const std::string& path);
/// TSV `token<TAB>valence`.
SentimentLexicon load_lexicon(const std::string& path);
/// TSV `token<TAB>count`.
std::map<std::string, double> load_frequency_table(const std::string& path);

// Compiled-in defaults; identical content ships under data/.
const SentimentLexicon& builtin_lexicon();
const std::set<std::string>& builtin_dictionary();
const std::set<std::string>& builtin_stoplist();
const std::map<std::string, double>& builtin_frequencies();
const std::set<std::string>& builtin_pronouns();

// --- features.bin -------------------------------------------------------
// Little-endian binary: magic "CGFT", u32 version, u32 max_len, u32 dim,
// u32 scalar_dim, u64 count, then per example: u16 id length, id bytes,
// u8 gold, scalar_dim f64, max_len*dim f64 row-major.

void write_features(const std::string& path, const std::vector<FeaturizedExample>& examples,
                    int max_len, int dim);

struct FeatureFile {
    int max_len = 0;
    int dim = 0;
    std::vector<FeaturizedExample> examples;
};

FeatureFile read_features(const std::string& path);

} // namespace cartograf::features

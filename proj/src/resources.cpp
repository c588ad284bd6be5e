#include <algorithm>

#include "cartograf/features.hpp"
#include "wordlists.hpp"

// Compiled-in default resources. The files under data/ carry the same
// content for CLI use; keep them in sync (test_features checks).
namespace cartograf::features {

const SentimentLexicon& builtin_lexicon() {
    static const SentimentLexicon lex = [] {
        SentimentLexicon l;
        for (const auto& w : words::positive_words()) l.entries[w.token] = w.valence;
        for (const auto& w : words::negative_words()) l.entries[w.token] = w.valence;
        return l;
    }();
    return lex;
}

const std::set<std::string>& builtin_stoplist() {
    static const std::set<std::string> stop = [] {
        std::set<std::string> s;
        for (const auto& w : words::function_words()) s.insert(w);
        for (const auto& w : words::pronouns()) s.insert(w);
        return s;
    }();
    return stop;
}

const std::set<std::string>& builtin_dictionary() {
    static const std::set<std::string> dict = [] {
        std::set<std::string> d;
        for (const auto& w : words::function_words()) d.insert(w);
        for (const auto& w : words::common_words()) d.insert(w);
        for (const auto& w : words::positive_words()) d.insert(w.token);
        for (const auto& w : words::negative_words()) d.insert(w.token);
        for (const auto& w : words::human_vocab()) d.insert(w);
        for (const auto& w : words::generated_vocab()) d.insert(w);
        for (const auto& w : words::pronouns()) d.insert(w);
        return d;
    }();
    return dict;
}

const std::map<std::string, double>& builtin_frequencies() {
    static const std::map<std::string, double> freq = [] {
        std::map<std::string, double> f;
        for (const auto& w : words::pronouns()) f[w] = 8000;
        for (const auto& w : words::function_words()) f[w] = 10000;
        for (const auto& w : words::common_words()) f[w] = 1000;
        for (const auto& w : words::human_vocab()) f[w] = 300;
        for (const auto& w : words::generated_vocab()) f[w] = 300;
        for (const auto& w : words::positive_words()) f[w.token] = 200;
        for (const auto& w : words::negative_words()) f[w.token] = 150;
        return f;
    }();
    return freq;
}

const std::set<std::string>& builtin_pronouns() {
    static const std::set<std::string> p = [] {
        std::set<std::string> s;
        for (const auto& w : words::pronouns()) s.insert(w);
        return s;
    }();
    return p;
}

} // namespace cartograf::features

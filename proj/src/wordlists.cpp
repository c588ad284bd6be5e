#include "wordlists.hpp"

#include <set>

namespace cartograf::words {

const std::vector<std::string>& function_words() {
    // Includes the frequent pronouns so synthetic texts carry them at
    // label-independent rates (both corpus classes end up near-equal in
    // pronoun counts).
    static const std::vector<std::string> v = {
        "the", "a",    "an",   "of",   "to",   "and",  "in",   "it",   "is",   "was",
        "for", "on",   "with", "as",   "at",   "by",   "from", "this", "that", "be",
        "are", "were", "have", "has",  "had",  "not",  "but",  "or",   "so",   "if",
        "then", "than", "there", "here", "when", "while", "about", "into", "over", "after",
        "i",   "you",  "he",   "she",  "we",   "they", "them", "his",  "her",  "my",
        "your",
    };
    return v;
}

const std::vector<std::string>& common_words() {
    static const std::vector<std::string> v = {
        "time",   "day",    "thing",  "place",  "work",   "home",   "world",  "life",
        "hand",   "part",   "child",  "eye",    "woman",  "man",    "point",  "week",
        "case",   "group",  "number", "fact",   "idea",   "water",  "money",  "story",
        "kind",   "head",   "house",  "service", "friend", "power",  "hour",   "game",
        "line",   "end",    "member", "law",    "car",    "city",   "road",   "name",
        "team",   "minute", "door",   "office", "person", "health", "art",    "history",
        "result", "change", "morning", "reason", "research", "moment", "air",   "teacher",
        "force",  "education", "foot", "boy",   "age",    "policy", "process", "music",
    };
    return v;
}

const std::vector<Valenced>& positive_words() {
    static const std::vector<Valenced> v = {
        {"good", 1.9},     {"great", 3.1},    {"love", 3.2},      {"happy", 2.7},
        {"wonderful", 2.7}, {"amazing", 2.8},  {"best", 3.2},      {"nice", 1.8},
        {"excellent", 2.7}, {"awesome", 3.1},  {"perfect", 2.7},   {"beautiful", 2.9},
        {"enjoy", 2.2},    {"fantastic", 2.6}, {"brilliant", 2.8}, {"pleasant", 2.3},
    };
    return v;
}

const std::vector<Valenced>& negative_words() {
    static const std::vector<Valenced> v = {
        {"bad", -2.5},    {"terrible", -2.1}, {"hate", -2.7},  {"sad", -2.1},
        {"awful", -2.0},  {"worst", -3.1},    {"horrible", -2.5}, {"poor", -2.1},
        {"angry", -2.3},  {"ugly", -2.6},     {"boring", -1.3},  {"disappointing", -2.2},
    };
    return v;
}

const std::vector<std::string>& human_vocab() {
    // Kept small so each word recurs often enough for the classifier to
    // pick up at desk scale.
    static const std::vector<std::string> v = {
        "honestly", "actually", "basically", "kinda",
        "guess",    "folks",    "stuff",     "yeah",
    };
    return v;
}

const std::vector<std::string>& generated_vocab() {
    static const std::vector<std::string> v = {
        "furthermore", "moreover",  "consequently", "notably",
        "accordingly", "therefore", "additionally", "overall",
    };
    return v;
}

const std::vector<std::string>& pronouns() {
    static const std::vector<std::string> v = {
        "i",    "me",     "my",    "mine",   "myself",   "we",    "us",     "our",
        "ours", "ourselves", "you", "your",  "yours",    "yourself", "yourselves",
        "he",   "him",    "his",   "himself", "she",     "her",   "hers",   "herself",
        "it",   "its",    "itself", "they",  "them",     "their", "theirs", "themselves",
    };
    return v;
}

namespace {
const char* kSyllables[12] = {"vex", "zor", "jix", "wub", "dax", "mur",
                              "tev", "riz", "kol", "nib", "fos", "lum"};
constexpr uint64_t kDomainSalt = 0xD0ull;
constexpr uint64_t kStyleSalt = 0x57ull;
} // namespace

std::string pseudo_word(Rng& rng) {
    int syllables = 2 + static_cast<int>(rng.below(2));
    std::string w;
    for (int i = 0; i < syllables; ++i) w += kSyllables[rng.below(12)];
    return w;
}

const std::vector<std::string>& filler_pool() {
    // Two syllables each; style tokens use three, so filler never shadows
    // a style marker.
    static const std::vector<std::string> pool = [] {
        Rng rng(kDomainSalt);
        std::vector<std::string> v;
        std::set<std::string> seen;
        while (v.size() < 16) {
            std::string w;
            for (int s = 0; s < 2; ++s) w += kSyllables[rng.below(12)];
            if (seen.insert(w).second) v.push_back(w);
        }
        return v;
    }();
    return pool;
}

std::vector<double> domain_weights(const std::string& domain) {
    Rng rng(Rng::mix(Rng::hash_bytes(domain), kDomainSalt));
    std::vector<double> w(filler_pool().size());
    for (auto& x : w) x = 1.0 + 7.0 * rng.uniform();
    return w;
}

std::string style_token(corpus::Label label) {
    Rng rng(Rng::mix(kStyleSalt, static_cast<uint64_t>(label)));
    // Three syllables so style markers never collide with domain filler.
    std::string w;
    for (int i = 0; i < 3; ++i) w += kSyllables[rng.below(12)];
    return w;
}

} // namespace cartograf::words

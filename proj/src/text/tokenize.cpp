#include "remi/text/tokenize.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace remi::text {

namespace {

enum class CharKind { word, apostrophe, sentence_end, separator, space };

struct Classified {
    CharKind kind;
    std::size_t length;
};

bool starts_with_at(std::string_view s, std::size_t i, std::string_view pat) {
    return s.substr(i, pat.size()) == pat;
}

std::size_t utf8_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;
}

Classified classify(std::string_view s, std::size_t i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        if (std::isalnum(c)) return {CharKind::word, 1};
        if (c == '\'') return {CharKind::apostrophe, 1};
        if (std::isspace(c)) return {CharKind::space, 1};
        if (c == '.' || c == '!' || c == '?' || c == ';') {
            // Decimal point inside a number is not a sentence end.
            if (c == '.' && i > 0 && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
                std::isdigit(static_cast<unsigned char>(s[i + 1])))
                return {CharKind::word, 1};
            return {CharKind::sentence_end, 1};
        }
        return {CharKind::separator, 1};
    }
    static constexpr std::string_view kEnds[] = {"\xE3\x80\x82", "\xEF\xBC\x81", "\xEF\xBC\x9F", "\xEF\xBC\x9B",
                                                 "\xE2\x80\xA6"};
    static constexpr std::string_view kSeps[] = {"\xEF\xBC\x8C", "\xE3\x80\x81", "\xEF\xBC\x9A", "\xE2\x80\x9C",
                                                 "\xE2\x80\x9D", "\xE2\x80\x93", "\xE2\x80\x94", "\xE2\x80\x98",
                                                 "\xE3\x80\x8A", "\xE3\x80\x8B", "\xEF\xBC\x88", "\xEF\xBC\x89",
                                                 "\xC2\xA0"};
    if (starts_with_at(s, i, "\xE2\x80\x99")) return {CharKind::apostrophe, 3};
    for (auto e : kEnds)
        if (starts_with_at(s, i, e)) return {CharKind::sentence_end, e.size()};
    for (auto e : kSeps)
        if (starts_with_at(s, i, e)) return {CharKind::separator, e.size()};
    return {CharKind::word, std::min(utf8_length(c), s.size() - i)};
}

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words{
        "a",     "about", "after", "again", "all",   "also",   "am",    "an",    "and",   "any",   "are",
        "as",    "at",    "be",    "been",  "before", "being", "but",   "by",    "can",   "could", "did",
        "do",    "doe",   "does",  "doing", "down",  "during", "each",  "every", "few",   "for",   "from",
        "had",   "ha",    "has",   "have",  "having", "he",    "her",   "here",  "hers",  "him",   "his",
        "how",   "i",     "if",    "in",    "into",  "is",     "it",    "it's",  "its",   "just",  "me",
        "more",  "most",  "my",    "no",    "nor",   "not",    "now",   "of",    "off",   "on",    "once",
        "only",  "or",    "other", "our",   "ours",  "out",    "over",  "own",   "same",  "she",   "should",
        "so",    "some",  "such",  "than",  "that",  "the",    "their", "them",  "then",  "there", "these",
        "they",  "thi",   "this",  "those", "through", "to",   "too",   "under", "until", "up",    "very",
        "wa",    "was",   "we",    "were",  "what",  "when",   "where", "which", "while", "who",   "whom",
        "why",   "will",  "with",  "would", "you",   "your",   "yours", "used",  "one",   "many",  "much",
        "known", "well",  "still", "there's", "i'm", "we'd",   "i'd",   "us",    "yes",   "oh",    "really"};
    return words;
}

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> tokens;
    bool at_sentence_start = true;
    bool only_space_since_last = false;
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = classify(s, i);
        if (c.kind == CharKind::word) {
            Token t;
            t.begin = i;
            t.sentence_start = at_sentence_start;
            t.joined_to_previous = !tokens.empty() && only_space_since_last;
            std::size_t j = i;
            while (j < s.size()) {
                auto d = classify(s, j);
                if (d.kind == CharKind::word) {
                    j += d.length;
                } else if (d.kind == CharKind::apostrophe && j + d.length < s.size() &&
                           classify(s, j + d.length).kind == CharKind::word) {
                    j += d.length;  // inner apostrophe: "grandma's", "don't"
                } else {
                    break;
                }
            }
            t.end = j;
            t.text = std::string(s.substr(i, j - i));
            tokens.push_back(std::move(t));
            at_sentence_start = false;
            only_space_since_last = true;
            i = j;
            continue;
        }
        if (c.kind == CharKind::sentence_end) {
            at_sentence_start = true;
            only_space_since_last = false;
        } else if (c.kind != CharKind::space) {
            only_space_since_last = false;
        }
        i += c.length;
    }
    return tokens;
}

std::vector<Sentence> split_sentences(std::string_view s) {
    std::vector<Sentence> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        auto b = start;
        while (b < end && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        auto e = end;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        if (e > b) out.push_back({std::string(s.substr(b, e - b)), b});
    };
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = classify(s, i);
        if (c.kind == CharKind::sentence_end && s[i] != ';') {
            i += c.length;
            while (i < s.size()) {
                auto d = classify(s, i);
                if (d.kind != CharKind::sentence_end) break;
                i += d.length;
            }
            flush(i);
            start = i;
            continue;
        }
        // A blank line (paragraph break) also ends a sentence.
        if (s[i] == '\n') {
            auto j = i + 1;
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
            if (j < s.size() && s[j] == '\n') {
                flush(i);
                start = i = j + 1;
                continue;
            }
        }
        i += c.length;
    }
    flush(s.size());
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) {
        return ch < 0x80 ? static_cast<char>(std::tolower(ch)) : static_cast<char>(ch);
    });
    return out;
}

bool is_ascii(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

std::string normalize_term(std::string_view word) {
    std::string w = to_lower(word);
    for (auto pos = w.find("\xE2\x80\x99"); pos != std::string::npos; pos = w.find("\xE2\x80\x99"))
        w.replace(pos, 3, "'");
    if (!is_ascii(w)) return w;
    if (w.size() > 2 && w.compare(w.size() - 2, 2, "'s") == 0) w.resize(w.size() - 2);
    if (!w.empty() && w.back() == '\'') w.pop_back();
    if (w.size() > 3) {
        auto ends = [&](std::string_view suf) {
            return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
        };
        if (ends("ies")) {
            w.replace(w.size() - 3, 3, "y");
        } else if (ends("ss") || ends("us") || ends("is")) {
            // keep: "grass", "bus", "this"
        } else if (ends("s")) {
            w.pop_back();
        }
    }
    return w;
}

bool is_stopword(std::string_view normalized) { return stopwords().count(std::string(normalized)) != 0; }

std::vector<std::string> keywords(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& tok : tokenize(text)) {
        std::string term = normalize_term(tok.text);
        if (term.empty() || is_stopword(term)) continue;
        if (std::find(out.begin(), out.end(), term) == out.end()) out.push_back(std::move(term));
    }
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

}  // namespace remi::text

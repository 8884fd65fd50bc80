#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace remi::text {

struct Token {
    std::string text;  // as written
    std::size_t begin = 0;
    std::size_t end = 0;
    bool sentence_start = false;
    // True when only whitespace separates this token from the previous one.
    bool joined_to_previous = false;
};

// Words are runs of ASCII alphanumerics/apostrophes or of non-ASCII UTF-8
// sequences (CJK text has no spaces). ASCII and CJK sentence punctuation
// ends a sentence.
std::vector<Token> tokenize(std::string_view text);

// Sentences with their byte offsets; terminators stay attached. A blank
// line also ends a sentence.
struct Sentence {
    std::string text;
    std::size_t offset = 0;
};
std::vector<Sentence> split_sentences(std::string_view text);

std::string to_lower(std::string_view s);

// Lowercase, drop a trailing possessive, and fold simple English plurals
// ("rivers" -> "river", "cities" -> "city"). Non-ASCII words pass through.
std::string normalize_term(std::string_view word);

bool is_stopword(std::string_view normalized);

// Distinct normalized non-stopword terms, in order of first appearance.
std::vector<std::string> keywords(std::string_view text);

// Collapse runs of whitespace to one space and trim.
std::string collapse_whitespace(std::string_view s);

bool is_ascii(std::string_view s);

}  // namespace remi::text

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace pub {

/// Bundled open word lists standing in for proprietary category lexicons.
/// All entries are lower-cased and deduplicated at load time.
struct Lexicons {
    std::unordered_set<std::string> social;
    std::unordered_set<std::string> positive;
    std::unordered_set<std::string> negative;
    std::unordered_set<std::string> politeness;
    std::unordered_set<std::string> figurative_words;
    std::vector<std::pair<std::string, std::string>> figurative_phrases;  // two-word markers
    std::unordered_set<std::string> negations;
    std::unordered_map<std::string, double> valence;   // [-1, 1]
    std::unordered_map<std::string, double> boosters;  // multiplier for the next hit

    static Lexicons load(const std::filesystem::path& lexicon_dir);
};

/// Lower-cases and strips non-alphanumeric edges; drops empty tokens.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace pub

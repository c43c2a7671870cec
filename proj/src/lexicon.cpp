#include "pub/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "pub/io.hpp"

namespace pub {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::unordered_set<std::string> load_word_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon: " + path.string());
    std::unordered_set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(lower(line));
    }
    return out;
}

std::unordered_map<std::string, double> load_value_map(const std::filesystem::path& path,
                                                       double lo, double hi) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon: " + path.string());
    std::unordered_map<std::string, double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string word;
        double value = 0.0;
        if (ss >> word >> value) out[lower(word)] = std::clamp(value, lo, hi);
    }
    return out;
}

}  // namespace

Lexicons Lexicons::load(const std::filesystem::path& dir) {
    Lexicons lx;
    lx.social = load_word_list(dir / "social.txt");
    lx.positive = load_word_list(dir / "positive.txt");
    lx.negative = load_word_list(dir / "negative.txt");
    lx.politeness = load_word_list(dir / "politeness.txt");
    lx.figurative_words = load_word_list(dir / "figurative.txt");
    lx.negations = load_word_list(dir / "negations.txt");
    lx.valence = load_value_map(dir / "valence.tsv", -1.0, 1.0);
    lx.boosters = load_value_map(dir / "boosters.tsv", 0.0, 4.0);

    std::ifstream in(dir / "figurative_phrases.txt");
    if (!in) throw IoError("cannot open lexicon: " + (dir / "figurative_phrases.txt").string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto words = tokenize(line);
        if (words.size() == 2) lx.figurative_phrases.emplace_back(words[0], words[1]);
    }
    return lx;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        // strip non-alphanumeric edges, keep inner apostrophes/hyphens
        std::size_t b = 0, e = current.size();
        while (b < e && !std::isalnum(static_cast<unsigned char>(current[b]))) ++b;
        while (e > b && !std::isalnum(static_cast<unsigned char>(current[e - 1]))) --e;
        if (e > b) out.push_back(lower(current.substr(b, e - b)));
        current.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            current.push_back(c);
    }
    flush();
    return out;
}

}  // namespace pub

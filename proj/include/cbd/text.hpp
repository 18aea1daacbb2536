#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cbd {

// Token→index mapping with two reserved rows. Index 0 pads sequences, index 1
// absorbs out-of-vocabulary tokens; real tokens start at 2, ranked by corpus
// frequency with lexicographic tie-breaking.
struct Vocabulary {
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kUnk = 1;

    std::vector<std::string> tokens;   // position = index; [0]="<pad>", [1]="<unk>"
    std::vector<std::uint64_t> counts; // corpus frequency, 0 for the reserved rows
    std::unordered_map<std::string, std::int32_t> index;

    std::size_t size() const { return tokens.size(); }
    std::int32_t lookup(std::string_view token) const;

    // Stable fingerprint of the token ordering; stored alongside trained
    // models so a mismatched vocabulary is caught before prediction.
    std::uint64_t checksum() const;
};

struct EncodedPost {
    std::vector<std::int32_t> indices; // exactly L_max entries, left-padded
    std::size_t token_count = 0;       // token count before truncation
};

using StopwordSet = std::unordered_set<std::string>;

// One lowercase token per line; blank lines ignored. Throws on unreadable file.
StopwordSet load_stopwords(const std::string& path);

// Lowercase, strip punctuation in place, split on whitespace, drop stop words.
// May legitimately return an empty list.
std::vector<std::string> preprocess(std::string_view raw, const StopwordSet& stopwords);

// max_size, when set, caps the total vocabulary size including the two
// reserved rows; it must be at least 2.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& posts,
                       std::optional<std::size_t> max_size = std::nullopt);

// Nearest-rank 95th percentile of post lengths, never below 1.
std::size_t compute_max_len(const std::vector<std::size_t>& token_counts);

// Head truncation beyond l_max, left padding below it, UNK for unknown tokens.
EncodedPost encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                   std::size_t l_max);

void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

} // namespace cbd

#include "cbd/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cbd/hash.hpp"

namespace cbd {
namespace {

bool is_space_cp(char32_t c) {
    switch (c) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
        case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x200B:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

// ASCII punctuation plus the common Unicode punctuation blocks (general
// punctuation, CJK brackets, fullwidth forms). Checked after the whitespace
// test, so space-like code points inside these ranges never reach it.
bool is_punct_cp(char32_t c) {
    if (c < 0x80) return std::ispunct(static_cast<unsigned char>(c)) != 0;
    switch (c) {
        case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7:
        case 0x00BB: case 0x00BF: case 0x30FB:
            return true;
        default:
            break;
    }
    return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
           (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
           (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF0F) ||
           (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
           (c >= 0xFF5B && c <= 0xFF65);
}

// Decodes one UTF-8 code point at position i; advances i past it. Malformed
// sequences are surfaced one byte at a time so arbitrary input cannot throw.
char32_t decode_utf8(std::string_view s, std::size_t& i, std::size_t& len) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t n = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0) { n = 4; cp = b0 & 0x07u; }
    else if (b0 >= 0xE0) { n = 3; cp = b0 & 0x0Fu; }
    else if (b0 >= 0xC0) { n = 2; cp = b0 & 0x1Fu; }
    else if (b0 >= 0x80) { len = 1; ++i; return 0xFFFD; }
    if (i + n > s.size()) { len = 1; ++i; return 0xFFFD; }
    for (std::size_t k = 1; k < n; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0u) != 0x80u) { len = 1; ++i; return 0xFFFD; }
        cp = (cp << 6) | (b & 0x3Fu);
    }
    len = n;
    i += n;
    return cp;
}

} // namespace

std::int32_t Vocabulary::lookup(std::string_view token) const {
    auto it = index.find(std::string(token));
    return it == index.end() ? kUnk : it->second;
}

std::uint64_t Vocabulary::checksum() const {
    std::string joined;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) joined.push_back('\n');
        joined += tokens[i];
    }
    return fnv1a64(joined.data(), joined.size());
}

StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stop-word list: " + path);
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty()) continue;
        for (auto& ch : line) ch = char(std::tolower(static_cast<unsigned char>(ch)));
        set.insert(line);
    }
    return set;
}

std::vector<std::string> preprocess(std::string_view raw, const StopwordSet& stopwords) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && !stopwords.count(current)) out.push_back(current);
        current.clear();
    };
    std::size_t i = 0;
    while (i < raw.size()) {
        const std::size_t start = i;
        std::size_t len = 0;
        const char32_t cp = decode_utf8(raw, i, len);
        if (is_space_cp(cp)) {
            flush();
        } else if (is_punct_cp(cp)) {
            // stripped in place: "fool!!" and "don't" lose the marks, not split
        } else if (cp < 0x80) {
            current.push_back(char(std::tolower(static_cast<unsigned char>(cp))));
        } else {
            current.append(raw.substr(start, len));
        }
    }
    flush();
    return out;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& posts,
                       std::optional<std::size_t> max_size) {
    if (max_size && *max_size < 2)
        throw std::invalid_argument("vocabulary cap must allow the two reserved rows");
    std::unordered_map<std::string, std::uint64_t> freq;
    for (const auto& post : posts)
        for (const auto& tok : post) ++freq[tok];

    std::vector<std::pair<std::string, std::uint64_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (max_size && ranked.size() > *max_size - 2) ranked.resize(*max_size - 2);

    Vocabulary vocab;
    vocab.tokens = {"<pad>", "<unk>"};
    vocab.counts = {0, 0};
    vocab.index.reserve(ranked.size() + 2);
    vocab.index.emplace("<pad>", Vocabulary::kPad);
    vocab.index.emplace("<unk>", Vocabulary::kUnk);
    for (auto& [tok, count] : ranked) {
        vocab.index.emplace(tok, std::int32_t(vocab.tokens.size()));
        vocab.tokens.push_back(tok);
        vocab.counts.push_back(count);
    }
    return vocab;
}

std::size_t compute_max_len(const std::vector<std::size_t>& token_counts) {
    if (token_counts.empty())
        throw std::invalid_argument("cannot take a percentile of zero posts");
    std::vector<std::size_t> sorted(token_counts);
    std::sort(sorted.begin(), sorted.end());
    const auto n = double(sorted.size());
    const auto rank = std::size_t(std::ceil(0.95 * n)); // nearest-rank, 1-based
    return std::max<std::size_t>(1, sorted[rank - 1]);
}

EncodedPost encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                   std::size_t l_max) {
    if (l_max < 1) throw std::invalid_argument("sequence length must be at least 1");
    EncodedPost post;
    post.token_count = tokens.size();
    const std::size_t keep = std::min(tokens.size(), l_max);
    post.indices.assign(l_max - keep, Vocabulary::kPad);
    for (std::size_t i = 0; i < keep; ++i)
        post.indices.push_back(vocab.lookup(tokens[i]));
    return post;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
    for (const auto& tok : vocab.tokens) out << tok << '\n';
    if (!out) throw std::runtime_error("short write to vocabulary: " + path);
}

Vocabulary load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        vocab.index.emplace(line, std::int32_t(vocab.tokens.size()));
        vocab.tokens.push_back(line);
        vocab.counts.push_back(0);
    }
    if (vocab.tokens.size() < 2 || vocab.tokens[0] != "<pad>" || vocab.tokens[1] != "<unk>")
        throw std::runtime_error("vocabulary file missing reserved rows: " + path);
    return vocab;
}

} // namespace cbd

#include "cbd/embeddings.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cbd {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string f;
    while (in >> f) fields.push_back(std::move(f));
    return fields;
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

double parse_number(const std::string& s, const std::string& path, std::size_t lineno) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size())
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unparsable number '" + s + "'");
    return v;
}

} // namespace

template <typename T>
EmbeddingMatrixT<T> init_random_embedding(const Vocabulary& vocab, std::size_t d, Rng& rng) {
    if (d < 1) throw std::invalid_argument("embedding dimension must be at least 1");
    const std::size_t V = vocab.size();
    EmbeddingMatrixT<T> emb;
    emb.matrix = TensorT<T>({V, d});
    emb.from_file.assign(V, 0);
    for (std::size_t r = 1; r < V; ++r)
        for (std::size_t c = 0; c < d; ++c)
            emb.matrix.at2(r, c) = T(rng.uniform(-0.05, 0.05));
    return emb;
}

template <typename T>
EmbeddingMatrixT<T> load_pretrained_embedding(const std::string& path,
                                              const Vocabulary& vocab, std::size_t d,
                                              Rng& rng) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open word-vector file: " + path);

    auto emb = init_random_embedding<T>(vocab, d, rng);
    std::size_t matched = 0;
    std::string line;
    std::size_t lineno = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (first_content_line) {
            first_content_line = false;
            if (fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
                if (std::stoull(fields[1]) != d)
                    throw std::runtime_error(path + ": header dimension " + fields[1] +
                                             " does not match requested " +
                                             std::to_string(d));
                continue; // header line
            }
        }
        if (fields.size() != d + 1) {
            if (fields.size() >= 2)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": dimension mismatch (line has " +
                                         std::to_string(fields.size() - 1) +
                                         " values, expected " + std::to_string(d) + ")");
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed entry");
        }
        const auto it = vocab.index.find(fields[0]);
        if (it == vocab.index.end() || it->second < 2) {
            for (std::size_t c = 0; c < d; ++c)
                parse_number(fields[c + 1], path, lineno); // still validate
            continue;
        }
        const auto row = std::size_t(it->second);
        if (emb.from_file[row]) continue; // first occurrence wins
        for (std::size_t c = 0; c < d; ++c)
            emb.matrix.at2(row, c) = T(parse_number(fields[c + 1], path, lineno));
        emb.from_file[row] = 1;
        ++matched;
    }
    const std::size_t real_tokens = vocab.size() - 2;
    emb.coverage = real_tokens == 0 ? 0.0 : double(matched) / double(real_tokens);
    return emb;
}

template EmbeddingMatrixT<float> init_random_embedding<float>(const Vocabulary&, std::size_t,
                                                              Rng&);
template EmbeddingMatrixT<double> init_random_embedding<double>(const Vocabulary&,
                                                                std::size_t, Rng&);
template EmbeddingMatrixT<float> load_pretrained_embedding<float>(const std::string&,
                                                                  const Vocabulary&,
                                                                  std::size_t, Rng&);
template EmbeddingMatrixT<double> load_pretrained_embedding<double>(const std::string&,
                                                                    const Vocabulary&,
                                                                    std::size_t, Rng&);

} // namespace cbd

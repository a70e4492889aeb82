#include "rnnscope/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace rnnscope {

namespace {
const std::string kOovToken = "<oov>";
const std::string kPadToken = "<pad>";
}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{kOovToken, kPadToken}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 2 || tokens_[0] != kOovToken || tokens_[1] != kPadToken)
        throw DataError("Vocabulary: reserved tokens <oov>/<pad> must occupy indices 0 and 1");
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        index_.emplace(tokens_[i], static_cast<std::int32_t>(i));
    if (index_.size() != tokens_.size()) throw DataError("Vocabulary: duplicate tokens");
}

std::int32_t Vocabulary::lookup(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kOov : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
    if (id < 0 || id >= size()) throw DataError("Vocabulary: token id out of range");
    return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) {
            out.push_back(word);
            word.clear();
        }
    };
    for (unsigned char ch : text) {
        const char c = static_cast<char>(std::tolower(ch));
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') {
            word.push_back(c);
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else {
            flush();
            out.emplace_back(1, c);
        }
    }
    flush();
    return out;
}

Vocabulary build_vocabulary(const std::vector<std::string>& corpus, std::size_t max_size) {
    if (corpus.empty()) throw DataError("build_vocabulary: empty corpus");
    if (max_size < 3) throw DataError("build_vocabulary: max_size leaves no room beyond reserved tokens");
    // std::map keeps tie-breaking lexicographic without an extra sort key.
    std::map<std::string, std::size_t> counts;
    for (const auto& doc : corpus)
        for (auto& tok : tokenize(doc)) ++counts[tok];

    std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::string> tokens{kOovToken, kPadToken};
    for (const auto& [tok, count] : entries) {
        if (tokens.size() >= max_size) break;
        tokens.push_back(tok);
    }
    return Vocabulary(std::move(tokens));
}

std::vector<RawDocument> read_raw_documents(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::vector<RawDocument> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected \"<label>\\t<text>\"");
        const std::string label = line.substr(0, tab);
        if (label != "0" && label != "1")
            throw DataError(path + ":" + std::to_string(lineno) + ": label must be 0 or 1");
        docs.push_back({line.substr(tab + 1), label == "1" ? 1 : 0});
    }
    if (docs.empty()) throw DataError("dataset file has no documents: " + path);
    return docs;
}

namespace {

std::vector<Document> tokenize_split(const std::vector<RawDocument>& raw, const Vocabulary& vocab,
                                     std::size_t max_length) {
    std::vector<Document> out;
    out.reserve(raw.size());
    for (const auto& rd : raw) {
        Document d;
        d.label = rd.label;
        for (const auto& tok : tokenize(rd.text)) {
            if (d.tokens.size() >= max_length) break;
            d.tokens.push_back(vocab.lookup(tok));
        }
        if (!d.tokens.empty()) out.push_back(std::move(d));
    }
    return out;
}

}  // namespace

Dataset make_dataset(const std::vector<RawDocument>& train, const std::vector<RawDocument>& dev,
                     const std::vector<RawDocument>& test, std::size_t vocab_max,
                     std::size_t max_length) {
    std::vector<std::string> corpus;
    corpus.reserve(train.size());
    for (const auto& rd : train) corpus.push_back(rd.text);
    Dataset ds;
    ds.vocabulary = build_vocabulary(corpus, vocab_max);
    ds.train = tokenize_split(train, ds.vocabulary, max_length);
    ds.validation = tokenize_split(dev, ds.vocabulary, max_length);
    ds.test = tokenize_split(test, ds.vocabulary, max_length);
    if (ds.train.empty() || ds.validation.empty() || ds.test.empty())
        throw DataError("make_dataset: a split is empty after tokenization");
    return ds;
}

std::vector<double> synthetic_valences(const SyntheticSpec& spec) {
    if (spec.positive_tokens + spec.negative_tokens > spec.content_tokens)
        throw DataError("synthetic spec: more valenced tokens than content tokens");
    if (spec.positive_tokens + spec.negative_tokens < 2 || spec.positive_tokens == 0 ||
        spec.negative_tokens == 0)
        throw DataError("synthetic spec: need at least one positive and one negative token");
    std::vector<double> val(2 + spec.content_tokens, 0.0);
    for (std::size_t i = 0; i < spec.positive_tokens; ++i)
        val[2 + i] =
            std::sqrt(static_cast<double>(i + 1) / static_cast<double>(spec.positive_tokens));
    for (std::size_t i = 0; i < spec.negative_tokens; ++i)
        val[2 + spec.positive_tokens + i] =
            -std::sqrt(static_cast<double>(i + 1) / static_cast<double>(spec.negative_tokens));
    return val;
}

Vocabulary synthetic_vocabulary(const SyntheticSpec& spec) {
    auto pad_num = [](std::size_t i, int width) {
        std::string s = std::to_string(i);
        while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
        return s;
    };
    std::vector<std::string> tokens{kOovToken, kPadToken};
    for (std::size_t i = 0; i < spec.positive_tokens; ++i) tokens.push_back("pos" + pad_num(i, 2));
    for (std::size_t i = 0; i < spec.negative_tokens; ++i) tokens.push_back("neg" + pad_num(i, 2));
    const std::size_t neutral = spec.content_tokens - spec.positive_tokens - spec.negative_tokens;
    for (std::size_t i = 0; i < neutral; ++i) tokens.push_back("neu" + pad_num(i, 3));
    return Vocabulary(std::move(tokens));
}

namespace {

std::vector<Document> generate_split(const SyntheticSpec& spec,
                                     const std::vector<double>& valences, std::size_t n_docs,
                                     Rng& rng) {
    // Fixed sampling distribution over content tokens: weight valence_weight
    // for valenced ones, 1 for neutral.
    const std::size_t n_content = spec.content_tokens;
    std::vector<double> cumulative(n_content);
    double total = 0.0;
    for (std::size_t i = 0; i < n_content; ++i) {
        total += valences[2 + i] != 0 ? spec.valence_weight : 1.0;
        cumulative[i] = total;
    }
    auto draw_token = [&]() -> std::int32_t {
        const double u = rng.uniform() * total;
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        return static_cast<std::int32_t>(2 + (it - cumulative.begin()));
    };

    std::vector<Document> docs;
    docs.reserve(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        Document doc;
        for (;;) {
            const std::size_t len =
                spec.doc_length_min +
                static_cast<std::size_t>(rng.uniform_int(spec.doc_length_max - spec.doc_length_min + 1));
            doc.tokens.clear();
            double sum = 0.0;
            for (std::size_t t = 0; t < len; ++t) {
                const std::int32_t tok = draw_token();
                doc.tokens.push_back(tok);
                sum += valences[static_cast<std::size_t>(tok)];
            }
            if (std::abs(sum) > spec.margin) {
                doc.label = sum > 0.0 ? 1 : 0;
                break;
            }
            // sum inside the neutral band: resample the whole document
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.doc_length_min < 1 || spec.doc_length_max < spec.doc_length_min)
        throw DataError("synthetic spec: bad document length range");
    if (spec.margin < 0.0) throw DataError("synthetic spec: margin must be >= 0");
    if (spec.margin >= static_cast<double>(spec.doc_length_max))
        throw DataError("synthetic spec: margin excludes every document");
    const auto valences = synthetic_valences(spec);  // validates the assignment
    Dataset ds;
    ds.vocabulary = synthetic_vocabulary(spec);
    Rng train_rng(derive_seed(seed, "synthetic/train"));
    Rng dev_rng(derive_seed(seed, "synthetic/dev"));
    Rng test_rng(derive_seed(seed, "synthetic/test"));
    ds.train = generate_split(spec, valences, spec.train_docs, train_rng);
    ds.validation = generate_split(spec, valences, spec.dev_docs, dev_rng);
    ds.test = generate_split(spec, valences, spec.test_docs, test_rng);
    return ds;
}

void write_documents(const std::string& path, const std::vector<Document>& docs,
                     const Vocabulary& vocab) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    for (const auto& d : docs) {
        out << d.label << '\t';
        for (std::size_t i = 0; i < d.tokens.size(); ++i) {
            if (i) out << ' ';
            out << vocab.token(d.tokens[i]);
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing dataset file: " + path);
}

}  // namespace rnnscope

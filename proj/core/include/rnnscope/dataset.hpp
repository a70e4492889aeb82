#pragma once

#include "rnnscope/common.hpp"
#include "rnnscope/rng.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace rnnscope {

/// One tokenized document with a binary sentiment label (0 negative,
/// 1 positive). Token ids always index a Vocabulary.
struct Document {
    std::vector<std::int32_t> tokens;  // non-empty
    int label = 0;
};

/// Token table with reserved entries: index 0 is the out-of-vocabulary
/// token, index 1 is padding. Lookup of an unknown token yields 0.
class Vocabulary {
public:
    static constexpr std::int32_t kOov = 0;
    static constexpr std::int32_t kPad = 1;

    Vocabulary();
    explicit Vocabulary(std::vector<std::string> tokens);  // must start with the reserved pair

    std::int32_t lookup(const std::string& token) const;
    const std::string& token(std::int32_t id) const;
    std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> index_;
};

/// Lowercases and splits into word tokens ([a-z0-9']+ runs) and single
/// punctuation tokens. Deterministic.
std::vector<std::string> tokenize(const std::string& text);

/// Most-frequent `max_size` tokens (including the two reserved slots),
/// count ties broken lexicographically. Errors on an empty corpus.
Vocabulary build_vocabulary(const std::vector<std::string>& corpus, std::size_t max_size);

/// Train/validation/test document sets sharing one vocabulary.
struct Dataset {
    Vocabulary vocabulary;
    std::vector<Document> train;
    std::vector<Document> validation;
    std::vector<Document> test;
};

struct RawDocument {
    std::string text;
    int label = 0;
};

/// Reads "<label>\t<text>" lines. Throws DataError on unreadable files or
/// malformed lines; lines that tokenize to nothing are skipped.
std::vector<RawDocument> read_raw_documents(const std::string& path);

/// Assemble a Dataset from raw text splits: vocabulary built on the train
/// split, every split tokenized with it, documents truncated to max_length.
Dataset make_dataset(const std::vector<RawDocument>& train, const std::vector<RawDocument>& dev,
                     const std::vector<RawDocument>& test, std::size_t vocab_max,
                     std::size_t max_length);

/// Synthetic valence-sum task. Positive tokens carry graded valences
/// sqrt(1/k), sqrt(2/k), ..., 1 (k = positive_tokens; the single-token case
/// reduces to +1), negative tokens the mirrored negative values, the rest
/// zero. The square-root spacing keeps magnitudes pairwise incommensurate,
/// so running sums fill a continuum instead of a lattice. Documents sample
/// tokens i.i.d. from a fixed weighted distribution; the label is 1 iff the
/// valence sum is positive, and draws with |sum| <= margin are resampled
/// (the neutral band, analogous to dropping neutral reviews when a
/// sentiment corpus is binarized; margin 0 recovers plain zero-sum
/// resampling).
struct SyntheticSpec {
    std::size_t content_tokens = 50;
    std::size_t positive_tokens = 3;
    std::size_t negative_tokens = 3;
    double valence_weight = 1.0;  // sampling weight of valenced tokens vs 1.0
    double margin = 0.25;
    std::size_t doc_length_min = 50;
    std::size_t doc_length_max = 200;
    std::size_t train_docs = 6000;
    std::size_t dev_docs = 500;
    std::size_t test_docs = 1000;
};

/// Valence by vocabulary id under a spec (reserved ids are 0).
std::vector<double> synthetic_valences(const SyntheticSpec& spec);

/// Vocabulary of a synthetic spec: reserved pair then pos00.., neg00..,
/// neu000.. content tokens.
Vocabulary synthetic_vocabulary(const SyntheticSpec& spec);

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Writes documents in the "<label>\t<text>" format.
void write_documents(const std::string& path, const std::vector<Document>& docs,
                     const Vocabulary& vocab);

}  // namespace rnnscope

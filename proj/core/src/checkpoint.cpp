#include "rnnscope/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace rnnscope {

namespace {

constexpr char kMagic[4] = {'R', 'N', 'S', 'C'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw DataError("checkpoint: truncated while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

float get_f32(std::istream& in, const std::string& what) {
    const std::uint32_t bits = get_u32(in, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void put_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) put_f32(out, static_cast<float>(m(i, j)));
}

Matrix get_tensor(std::istream& in, std::string& name) {
    const std::uint32_t name_len = get_u32(in, "tensor name length");
    if (name_len > 256) throw DataError("checkpoint: implausible tensor name length");
    name.resize(name_len);
    if (!in.read(name.data(), name_len)) throw DataError("checkpoint: truncated tensor name");
    const std::uint32_t rows = get_u32(in, "tensor rows of " + name);
    const std::uint32_t cols = get_u32(in, "tensor cols of " + name);
    Matrix m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j)
            m(i, j) = static_cast<double>(get_f32(in, "tensor data of " + name));
    return m;
}

std::uint32_t architecture_tag(Architecture a) { return static_cast<std::uint32_t>(a); }

Architecture architecture_from_tag(std::uint32_t tag) {
    if (tag > static_cast<std::uint32_t>(Architecture::Linear))
        throw DataError("checkpoint: unknown architecture tag " + std::to_string(tag));
    return static_cast<Architecture>(tag);
}

}  // namespace

void save_checkpoint(const std::string& path, const ClassifierModel& model,
                     const Vocabulary& vocab) {
    if (vocab.size() != model.vocab_size())
        throw ShapeError("save_checkpoint: vocabulary size does not match embedding rows");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, architecture_tag(model.cell.architecture));
    put_u32(out, static_cast<std::uint32_t>(model.cell.hidden_size));
    put_u32(out, static_cast<std::uint32_t>(model.cell.input_size));
    put_u32(out, static_cast<std::uint32_t>(model.vocab_size()));

    const auto& gates = gate_names(model.cell.architecture);
    const std::uint32_t n_tensors =
        1 + 2 * static_cast<std::uint32_t>(gates.size()) + 2;  // embedding, kernels+biases, readout
    put_u32(out, n_tensors);

    put_tensor(out, "embedding", model.embedding);
    for (std::size_t g = 0; g < gates.size(); ++g) {
        put_tensor(out, gates[g] + ".kernel", model.cell.kernels[g]);
        put_tensor(out, gates[g] + ".bias", Matrix(model.cell.biases[g]));
    }
    put_tensor(out, "readout.weights", Matrix(model.readout_weights));
    Matrix bias(1, 1);
    bias(0, 0) = model.readout_bias;
    put_tensor(out, "readout.bias", bias);
    if (!out) throw DataError("failed writing checkpoint: " + path);
    out.close();

    std::ofstream vout(path + ".vocab", std::ios::binary | std::ios::trunc);
    if (!vout) throw DataError("cannot write vocabulary companion: " + path + ".vocab");
    for (const auto& tok : vocab.tokens()) vout << tok << '\n';
    if (!vout) throw DataError("failed writing vocabulary companion: " + path + ".vocab");
}

LoadedCheckpoint load_checkpoint(const std::string& path,
                                 std::optional<Architecture> expected_architecture) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("checkpoint: bad magic in " + path);
    const std::uint32_t version = get_u32(in, "version");
    if (version != kCheckpointVersion)
        throw DataError("checkpoint: unsupported format version " + std::to_string(version));
    const Architecture arch = architecture_from_tag(get_u32(in, "architecture"));
    if (expected_architecture && *expected_architecture != arch)
        throw DataError(std::string("checkpoint: architecture mismatch (stored ") +
                        architecture_name(arch) + ", expected " +
                        architecture_name(*expected_architecture) + ")");
    const std::uint32_t hidden = get_u32(in, "hidden size");
    const std::uint32_t input = get_u32(in, "embedding dim");
    const std::uint32_t vocab_size = get_u32(in, "vocab size");
    const std::uint32_t n_tensors = get_u32(in, "tensor count");

    LoadedCheckpoint loaded;
    ClassifierModel& model = loaded.model;
    model.cell = zero_cell(arch, hidden, input);

    const auto& gates = gate_names(arch);
    const std::uint32_t expected_tensors = 1 + 2 * static_cast<std::uint32_t>(gates.size()) + 2;
    if (n_tensors != expected_tensors)
        throw DataError("checkpoint: tensor count mismatch for " + std::string(architecture_name(arch)));

    std::string name;
    for (std::uint32_t t = 0; t < n_tensors; ++t) {
        Matrix m = get_tensor(in, name);
        if (name == "embedding") {
            if (m.rows() != vocab_size || m.cols() != input)
                throw DataError("checkpoint: embedding tensor has wrong shape");
            model.embedding = std::move(m);
            continue;
        }
        if (name == "readout.weights") {
            if (m.cols() != 1 || m.rows() != model.cell.state_size())
                throw DataError("checkpoint: readout.weights has wrong shape");
            model.readout_weights = m.col(0);
            continue;
        }
        if (name == "readout.bias") {
            if (m.rows() != 1 || m.cols() != 1)
                throw DataError("checkpoint: readout.bias has wrong shape");
            model.readout_bias = m(0, 0);
            continue;
        }
        bool matched = false;
        for (std::size_t g = 0; g < gates.size(); ++g) {
            if (name == gates[g] + ".kernel") {
                if (m.rows() != hidden || m.cols() != hidden + input)
                    throw DataError("checkpoint: " + name + " has wrong shape");
                model.cell.kernels[g] = std::move(m);
                matched = true;
                break;
            }
            if (name == gates[g] + ".bias") {
                if (m.cols() != 1 || m.rows() != hidden)
                    throw DataError("checkpoint: " + name + " has wrong shape");
                model.cell.biases[g] = m.col(0);
                matched = true;
                break;
            }
        }
        if (!matched) throw DataError("checkpoint: unexpected tensor '" + name + "'");
    }
    if (model.embedding.size() == 0 || model.readout_weights.size() == 0)
        throw DataError("checkpoint: missing tensors in " + path);

    std::ifstream vin(path + ".vocab", std::ios::binary);
    if (!vin) throw DataError("cannot open vocabulary companion: " + path + ".vocab");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(vin, line)) tokens.push_back(line);
    if (tokens.size() != vocab_size)
        throw DataError("checkpoint: vocabulary companion has " + std::to_string(tokens.size()) +
                        " tokens, header says " + std::to_string(vocab_size));
    loaded.vocabulary = Vocabulary(std::move(tokens));
    return loaded;
}

}  // namespace rnnscope

#include "rnnscope/config.hpp"

#include "rnnscope/cells.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rnnscope {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    T out{};
    const std::string v = trim(value);
    if constexpr (std::is_floating_point_v<T>) {
        try {
            std::size_t pos = 0;
            out = static_cast<T>(std::stod(v, &pos));
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError("config field '" + key + "': not a number: \"" + v + "\"");
        }
    } else {
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size())
            throw ConfigError("config field '" + key + "': not an integer: \"" + v + "\"");
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config field '" + key + "': expected true/false, got \"" + v + "\"");
}

// key registry; order defines the canonical serialization
const std::vector<std::pair<std::string, Field>>& field_registry() {
    static const std::vector<std::pair<std::string, Field>> fields = [] {
        std::vector<std::pair<std::string, Field>> f;
        auto add = [&f](const std::string& key, auto getter) {
            f.push_back({key, Field{
                                  [getter, key](PipelineConfig& c, const std::string&,
                                                const std::string& value) {
                                      auto& ref = std::invoke(getter, c);
                                      using T = std::decay_t<decltype(ref)>;
                                      if constexpr (std::is_same_v<T, std::string>)
                                          ref = trim(value);
                                      else if constexpr (std::is_same_v<T, bool>)
                                          ref = parse_bool(value, key);
                                      else
                                          ref = parse_number<T>(value, key);
                                  },
                                  [getter](const PipelineConfig& c) {
                                      auto& ref = std::invoke(getter, const_cast<PipelineConfig&>(c));
                                      using T = std::decay_t<decltype(ref)>;
                                      if constexpr (std::is_same_v<T, std::string>)
                                          return std::string(ref);
                                      else if constexpr (std::is_same_v<T, bool>)
                                          return std::string(ref ? "true" : "false");
                                      else if constexpr (std::is_floating_point_v<T>)
                                          return format_double(ref);
                                      else
                                          return std::to_string(ref);
                                  }}});
            (void)key;
        };
        add("seed", [](PipelineConfig& c) -> std::uint64_t& { return c.seed; });
        add("data.source", [](PipelineConfig& c) -> std::string& { return c.data_source; });
        add("data.train", [](PipelineConfig& c) -> std::string& { return c.data_train; });
        add("data.dev", [](PipelineConfig& c) -> std::string& { return c.data_dev; });
        add("data.test", [](PipelineConfig& c) -> std::string& { return c.data_test; });
        add("data.vocab_max", [](PipelineConfig& c) -> std::size_t& { return c.vocab_max; });
        add("data.max_length", [](PipelineConfig& c) -> std::size_t& { return c.max_length; });
        add("synthetic.content_tokens",
            [](PipelineConfig& c) -> std::size_t& { return c.synthetic.content_tokens; });
        add("synthetic.positive_tokens",
            [](PipelineConfig& c) -> std::size_t& { return c.synthetic.positive_tokens; });
        add("synthetic.negative_tokens",
            [](PipelineConfig& c) -> std::size_t& { return c.synthetic.negative_tokens; });
        add("synthetic.valence_weight",
            [](PipelineConfig& c) -> double& { return c.synthetic.valence_weight; });
        add("synthetic.margin", [](PipelineConfig& c) -> double& { return c.synthetic.margin; });
        add("synthetic.doc_length_min",
            [](PipelineConfig& c) -> std::size_t& { return c.synthetic.doc_length_min; });
        add("synthetic.doc_length_max",
            [](PipelineConfig& c) -> std::size_t& { return c.synthetic.doc_length_max; });
        add("synthetic.train_docs",
            [](PipelineConfig& c) -> std::size_t& { return c.synthetic.train_docs; });
        add("synthetic.dev_docs",
            [](PipelineConfig& c) -> std::size_t& { return c.synthetic.dev_docs; });
        add("synthetic.test_docs",
            [](PipelineConfig& c) -> std::size_t& { return c.synthetic.test_docs; });
        add("model.architecture", [](PipelineConfig& c) -> std::string& { return c.architecture; });
        add("model.hidden_size", [](PipelineConfig& c) -> Eigen::Index& { return c.hidden_size; });
        add("model.embedding_dim",
            [](PipelineConfig& c) -> Eigen::Index& { return c.embedding_dim; });
        add("train.epochs", [](PipelineConfig& c) -> int& { return c.epochs; });
        add("train.learning_rate", [](PipelineConfig& c) -> double& { return c.learning_rate; });
        add("train.adam_beta1", [](PipelineConfig& c) -> double& { return c.adam_beta1; });
        add("train.adam_beta2", [](PipelineConfig& c) -> double& { return c.adam_beta2; });
        add("train.grad_clip", [](PipelineConfig& c) -> double& { return c.grad_clip; });
        add("baseline.l2", [](PipelineConfig& c) -> double& { return c.bow_l2; });
        add("baseline.max_iterations",
            [](PipelineConfig& c) -> std::size_t& { return c.bow_max_iterations; });
        add("fixed_points.count", [](PipelineConfig& c) -> std::size_t& { return c.fp_count; });
        add("fixed_points.threshold", [](PipelineConfig& c) -> double& { return c.fp_threshold; });
        add("fixed_points.learning_rate",
            [](PipelineConfig& c) -> double& { return c.fp_learning_rate; });
        add("fixed_points.lr_decay", [](PipelineConfig& c) -> double& { return c.fp_lr_decay; });
        add("fixed_points.decay_every",
            [](PipelineConfig& c) -> int& { return c.fp_decay_every; });
        add("fixed_points.max_iterations",
            [](PipelineConfig& c) -> int& { return c.fp_max_iterations; });
        add("fixed_points.threads", [](PipelineConfig& c) -> unsigned& { return c.fp_threads; });
        add("analysis.valence_set_size",
            [](PipelineConfig& c) -> std::size_t& { return c.valence_set_size; });
        add("analysis.null_samples",
            [](PipelineConfig& c) -> std::size_t& { return c.null_samples; });
        add("analysis.k_neighbors", [](PipelineConfig& c) -> int& { return c.k_neighbors; });
        add("analysis.lle_ridge", [](PipelineConfig& c) -> double& { return c.lle_ridge; });
        add("analysis.n_modes", [](PipelineConfig& c) -> int& { return c.n_modes; });
        add("analysis.autonomous_starts",
            [](PipelineConfig& c) -> std::size_t& { return c.autonomous_starts; });
        add("analysis.autonomous_steps",
            [](PipelineConfig& c) -> int& { return c.autonomous_steps; });
        add("analysis.example_fixed_points",
            [](PipelineConfig& c) -> std::size_t& { return c.example_fixed_points; });
        add("analysis.projection_docs",
            [](PipelineConfig& c) -> std::size_t& { return c.projection_docs; });
        add("analysis.max_docs",
            [](PipelineConfig& c) -> std::size_t& { return c.max_analysis_docs; });
        add("analysis.check_jacobians",
            [](PipelineConfig& c) -> bool& { return c.check_jacobians; });
        add("output.dir", [](PipelineConfig& c) -> std::string& { return c.out_dir; });
        add("output.svg", [](PipelineConfig& c) -> bool& { return c.svg; });
        return f;
    }();
    return fields;
}

const Field* find_field(const std::string& key) {
    for (const auto& [k, f] : field_registry())
        if (k == key) return &f;
    return nullptr;
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig config;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key_local = trim(t.substr(0, eq));
        if (key_local.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        const std::string key = section.empty() ? key_local : section + "." + key_local;
        const Field* field = find_field(key);
        if (!field) throw ConfigError("unknown config field '" + key + "'");
        field->set(config, key, t.substr(eq + 1));
    }
    return config;
}

PipelineConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const PipelineConfig& config) {
    std::string out;
    std::string section;
    for (const auto& [key, field] : field_registry()) {
        const auto dot = key.find('.');
        const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
        const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        if (sec != section) {
            if (!out.empty()) out += "\n";
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += name + " = " + field.get(config) + "\n";
    }
    return out;
}

void validate_config(const PipelineConfig& config) {
    architecture_from_name(config.architecture);  // throws ConfigError on bad value
    if (config.data_source != "synthetic" && config.data_source != "file")
        throw ConfigError("config field 'data.source': must be synthetic or file");
    if (config.data_source == "file" &&
        (config.data_train.empty() || config.data_dev.empty() || config.data_test.empty()))
        throw ConfigError("config field 'data.train/dev/test': required when data.source = file");
    if (config.hidden_size < 1) throw ConfigError("config field 'model.hidden_size': must be >= 1");
    if (config.embedding_dim < 1)
        throw ConfigError("config field 'model.embedding_dim': must be >= 1");
    if (config.epochs < 0) throw ConfigError("config field 'train.epochs': must be >= 0");
    if (!(config.learning_rate > 0.0))
        throw ConfigError("config field 'train.learning_rate': must be > 0");
    if (!(config.bow_l2 > 0.0)) throw ConfigError("config field 'baseline.l2': must be > 0");
    if (config.fp_threshold < 0.0)
        throw ConfigError("config field 'fixed_points.threshold': must be >= 0");
    if (config.fp_count < 1) throw ConfigError("config field 'fixed_points.count': must be >= 1");
    if (config.k_neighbors < 1)
        throw ConfigError("config field 'analysis.k_neighbors': must be >= 1");
    if (config.n_modes < 1) throw ConfigError("config field 'analysis.n_modes': must be >= 1");
    if (config.vocab_max < 3) throw ConfigError("config field 'data.vocab_max': must be >= 3");
    if (config.max_length < 1) throw ConfigError("config field 'data.max_length': must be >= 1");
    if (config.out_dir.empty()) throw ConfigError("config field 'output.dir': must not be empty");
}

}  // namespace rnnscope

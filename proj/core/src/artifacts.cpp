#include "rnnscope/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rnnscope {

const std::vector<TableSchema>& figure_schemas() {
    static const std::vector<TableSchema> schemas = {
        {"pca_variance",
         {"component", "trained_ratio", "trained_cumulative", "untrained_ratio",
          "untrained_cumulative"}},
        {"state_projections", {"kind", "doc", "step", "label", "pc1", "pc2", "logit"}},
        {"fixed_points",
         {"fp", "init_id", "q", "iterations", "theta", "pc1", "pc2", "pc3", "logit", "defective"}},
        {"eigen_spectra", {"fp", "mode", "real", "imag", "magnitude"}},
        {"time_constants", {"fp", "theta", "mode", "tau"}},
        {"input_effects", {"fp", "token", "valence_class", "pc1", "pc2", "projection"}},
        {"input_projections",
         {"fp", "theta", "mean_positive", "mean_negative", "mean_neutral", "complex_pair"}},
        {"overlaps", {"kind", "id", "value", "complex_pair"}},
        {"linearization_error", {"kind", "doc", "step", "value"}},
    };
    return schemas;
}

namespace {

const std::vector<TableSchema>& auxiliary_schemas() {
    static const std::vector<TableSchema> schemas = {
        {"velocity_trace", {"start", "step", "velocity"}},
        {"fixed_point_rejects", {"init_id", "q", "iterations", "reason"}},
        {"manifest", {"check", "kind", "value", "threshold", "comparator", "pass"}},
        {"table_index", {"table", "rows"}},
        {"metrics",
         {"row_kind", "epoch", "train_loss", "train_accuracy", "validation_accuracy",
          "test_accuracy", "selected"}},
        {"lexicon", {"token_id", "token", "coefficient", "valence_class"}},
        {"baseline_metrics", {"key", "value"}},
    };
    return schemas;
}

}  // namespace

const TableSchema* schema_for(const std::string& name) {
    for (const auto& s : figure_schemas())
        if (s.name == name) return &s;
    for (const auto& s : auxiliary_schemas())
        if (s.name == name) return &s;
    return nullptr;
}

std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}
std::string format_value(std::size_t v) { return std::to_string(v); }
std::string format_value(std::ptrdiff_t v) { return std::to_string(v); }
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(bool v) { return v ? "1" : "0"; }

TableWriter::TableWriter(std::string path, const TableSchema& schema)
    : path_(std::move(path)), schema_(schema) {
    for (std::size_t i = 0; i < schema_.columns.size(); ++i) {
        if (i) buffer_ += '\t';
        buffer_ += schema_.columns[i];
    }
    buffer_ += '\n';
}

TableWriter::~TableWriter() {
    try {
        close();
    } catch (...) {
    }
}

void TableWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != schema_.columns.size())
        throw ShapeError("table " + schema_.name + ": row has " + std::to_string(cells.size()) +
                         " cells, schema has " + std::to_string(schema_.columns.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += '\t';
        buffer_ += cells[i];
    }
    buffer_ += '\n';
    ++rows_;
}

void TableWriter::close() {
    if (closed_) return;
    closed_ = true;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write table: " + path_);
    out << buffer_;
    if (!out) throw DataError("failed writing table: " + path_);
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::string table_name_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = stem.rfind('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    return stem;
}

}  // namespace

Table read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("table has no header: " + path);
    Table t;
    t.schema.name = table_name_of(path);
    t.schema.columns = split_tabs(line);
    if (const TableSchema* known = schema_for(t.schema.name)) {
        if (known->columns != t.schema.columns)
            throw DataError("table " + t.schema.name + ": header does not match schema");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_tabs(line);
        if (cells.size() != t.schema.columns.size())
            throw DataError("table " + t.schema.name + ": ragged row");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    TableWriter w(path, *schema_for("manifest"));
    for (const auto& e : entries)
        w.row({e.check, e.kind, format_value(e.value), format_value(e.threshold), e.comparator,
               e.pass < 0 ? "na" : format_value(e.pass != 0)});
    w.close();
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    const Table t = read_table(path);
    std::vector<ManifestEntry> entries;
    for (const auto& r : t.rows) {
        ManifestEntry e;
        e.check = r[0];
        e.kind = r[1];
        e.value = std::stod(r[2]);
        e.threshold = std::stod(r[3]);
        e.comparator = r[4];
        e.pass = r[5] == "na" ? -1 : (r[5] == "1" ? 1 : 0);
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_table_index(const std::string& path,
                       const std::vector<std::pair<std::string, std::size_t>>& index) {
    TableWriter w(path, *schema_for("table_index"));
    for (const auto& [name, rows] : index) w.row({name, format_value(rows)});
    w.close();
}

std::map<std::string, std::size_t> read_table_index(const std::string& path) {
    const Table t = read_table(path);
    std::map<std::string, std::size_t> index;
    for (const auto& r : t.rows) index[r[0]] = static_cast<std::size_t>(std::stoull(r[1]));
    return index;
}

void write_svg_scatter(const std::string& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<SvgSeries>& series) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            } else {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;

    const double w = 560, h = 420, ml = 64, mr = 20, mt = 36, mb = 48;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto sy = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    svg << "<text x=\"16\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << h / 2 << ")\">" << y_label << "</text>\n";
    svg << "<text x=\"" << ml << "\" y=\"" << h - mb + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << format_value(xmin) << "</text>\n";
    svg << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << format_value(xmax) << "</text>\n";
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << h - mb
        << "\" text-anchor=\"end\" font-size=\"10\">" << format_value(ymin) << "</text>\n";
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
        << "\" text-anchor=\"end\" font-size=\"10\">" << format_value(ymax) << "</text>\n";

    for (const auto& s : series) {
        if (s.connect && s.points.size() > 1) {
            svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
            for (const auto& [x, y] : s.points)
                if (std::isfinite(x) && std::isfinite(y))
                    svg << format_value(sx(x)) << "," << format_value(sy(y)) << " ";
            svg << "\"/>\n";
        }
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            svg << "<circle cx=\"" << format_value(sx(x)) << "\" cy=\"" << format_value(sy(y))
                << "\" r=\"" << s.radius << "\" fill=\"" << s.color << "\" fill-opacity=\"0.7\"/>\n";
        }
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write svg: " + path);
    out << svg.str();
    if (!out) throw DataError("failed writing svg: " + path);
}

}  // namespace rnnscope

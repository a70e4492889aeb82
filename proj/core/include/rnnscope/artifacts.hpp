#pragma once

#include "rnnscope/common.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rnnscope {

/// Raised when an analysis completes but finds nothing to analyze (e.g. no
/// fixed points pass the threshold). Mapped to its own exit code.
struct DegenerateAnalysisError : Error {
    using Error::Error;
};

struct TableSchema {
    std::string name;  // file stem, e.g. "fixed_points"
    std::vector<std::string> columns;
};

/// The figure tables every analysis directory must contain.
const std::vector<TableSchema>& figure_schemas();

/// Schema by table name (figure tables plus auxiliary ones); null when the
/// name is unknown.
const TableSchema* schema_for(const std::string& name);

/// Fixed-format value rendering shared by every table writer, so identical
/// runs produce identical bytes.
std::string format_value(double v);
std::string format_value(std::size_t v);
std::string format_value(std::ptrdiff_t v);
std::string format_value(int v);
std::string format_value(bool v);

/// Tab-separated table with a header row. Writes are line-buffered into a
/// string and flushed on close so a failed analysis cannot leave a
/// half-written header.
class TableWriter {
public:
    TableWriter(std::string path, const TableSchema& schema);
    ~TableWriter();
    TableWriter(const TableWriter&) = delete;
    TableWriter& operator=(const TableWriter&) = delete;

    void row(const std::vector<std::string>& cells);
    std::size_t rows() const { return rows_; }
    const std::string& name() const { return schema_.name; }
    void close();

private:
    std::string path_;
    TableSchema schema_;
    std::string buffer_;
    std::size_t rows_ = 0;
    bool closed_ = false;
};

struct Table {
    TableSchema schema;
    std::vector<std::vector<std::string>> rows;
};

/// Reads a table and validates its header against the known schema for its
/// name (when known).
Table read_table(const std::string& path);

struct ManifestEntry {
    std::string check;
    std::string kind;  // "gate" or "info"
    double value = 0.0;
    double threshold = 0.0;
    std::string comparator;  // ">=", "<", "=", "none"
    int pass = -1;           // 1 pass, 0 fail, -1 not applicable (info)
};

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

void write_table_index(const std::string& path,
                       const std::vector<std::pair<std::string, std::size_t>>& index);
std::map<std::string, std::size_t> read_table_index(const std::string& path);

/// Minimal scatter/line SVG for the optional figure renderings.
struct SvgSeries {
    std::vector<std::pair<double, double>> points;
    std::string color = "#444444";
    double radius = 2.0;
    bool connect = false;
};

void write_svg_scatter(const std::string& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<SvgSeries>& series);

}  // namespace rnnscope

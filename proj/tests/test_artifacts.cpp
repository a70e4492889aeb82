#include "rnnscope/artifacts.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace rnnscope;

namespace {
const std::filesystem::path kDir = std::filesystem::temp_directory_path() / "rnnscope_artifacts";
}

TEST_CASE("table writer and reader round-trip with schema validation") {
    std::filesystem::create_directories(kDir);
    const std::string path = (kDir / "overlaps.tsv").string();
    {
        TableWriter w(path, *schema_for("overlaps"));
        w.row({"fixed_point", "0", format_value(0.91), "0"});
        w.row({"null", "0", format_value(0.03), "0"});
        CHECK(w.rows() == 2);
        w.close();
    }
    const Table t = read_table(path);
    CHECK(t.schema.name == "overlaps");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "fixed_point");
    CHECK(std::stod(t.rows[0][2]) == doctest::Approx(0.91));

    // header tampering is caught by the schema check
    {
        std::ofstream f(path, std::ios::trunc);
        f << "kind\tid\tvalues\tcomplex_pair\n";
    }
    CHECK_THROWS_AS(read_table(path), DataError);
}

TEST_CASE("table writer rejects ragged rows") {
    TableWriter w((kDir / "x.tsv").string(), *schema_for("table_index"));
    CHECK_THROWS_AS(w.row({"only-one-cell"}), ShapeError);
}

TEST_CASE("manifest round-trip") {
    std::filesystem::create_directories(kDir);
    const std::string path = (kDir / "manifest.tsv").string();
    std::vector<ManifestEntry> entries(2);
    entries[0] = {"fp_pass_fraction", "gate", 0.75, 0.5, ">=", 1};
    entries[1] = {"embedding_center_norm", "info", 0.004, 0.0, "none", -1};
    write_manifest(path, entries);
    const auto back = read_manifest(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].check == "fp_pass_fraction");
    CHECK(back[0].pass == 1);
    CHECK(back[0].value == doctest::Approx(0.75));
    CHECK(back[1].pass == -1);
    CHECK(back[1].kind == "info");
}

TEST_CASE("table index round-trip") {
    std::filesystem::create_directories(kDir);
    const std::string path = (kDir / "table_index.tsv").string();
    write_table_index(path, {{"overlaps", 512}, {"fixed_points", 300}});
    const auto idx = read_table_index(path);
    CHECK(idx.at("overlaps") == 512);
    CHECK(idx.at("fixed_points") == 300);
}

TEST_CASE("format_value handles special values deterministically") {
    CHECK(format_value(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_value(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_value(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_value(0.1) == format_value(0.1));
    CHECK(format_value(true) == "1");
    CHECK(format_value(std::size_t{7}) == "7");
}

TEST_CASE("svg scatter writes a well-formed file") {
    std::filesystem::create_directories(kDir);
    const std::string path = (kDir / "plot.svg").string();
    SvgSeries s;
    s.points = {{0.0, 0.0}, {1.0, 2.0}, {2.0, 1.0}};
    s.connect = true;
    write_svg_scatter(path, "demo", "x", "y", {s});
    std::ifstream in(path);
    const std::string content((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("</svg>") != std::string::npos);
    CHECK(content.find("polyline") != std::string::npos);
}

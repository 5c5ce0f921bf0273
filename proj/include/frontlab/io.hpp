#pragma once

#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace frontlab {

/// Column order of every CSV table the pipeline writes, keyed by file name.
struct CsvTable {
    std::string file;
    std::vector<std::string> columns;
    std::string description;
};

const std::vector<CsvTable>& csv_schema();
const CsvTable& csv_table(const std::string& file);
nlohmann::json schema_json();

/// Writes the header of a schema table, then rows of doubles as %.17g.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& dir, const std::string& file);
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;
    ~CsvWriter();

    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);
    void close();

private:
    std::FILE* fp_ = nullptr;
    std::size_t columns_ = 0;
    std::string path_;
};

/// Parsed numeric CSV with its header.
struct CsvData {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

CsvData read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
std::string read_text(const std::filesystem::path& path);

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

/// Static line chart as an SVG document.
std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series);

}  // namespace frontlab

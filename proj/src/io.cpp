#include "frontlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {

const std::vector<CsvTable>& csv_schema() {
    static const std::vector<CsvTable> tables{
        {"spectrum.csv", {"half_width", "mesh", "estimate"}, "raw Dirichlet estimates of lambda0, coarse to fine"},
        {"eigenfunction.csv",
         {"x", "phi", "dphi", "a", "gradient_lhs", "gradient_rhs"},
         "leading mode; gradient_lhs = A phi'^2, gradient_rhs = alpha a phi^2"},
        {"profile_super.csv", {"s", "U", "V"}, "super profile on the normalised coordinate"},
        {"profile_sub.csv", {"s", "U", "V"}, "sub profile on the normalised coordinate"},
        {"transforms.csv", {"v", "h", "h_tilde", "h_second"}, "transforms on a geometric v grid"},
        {"snapshots.csv", {"t", "x", "u", "w_tilde", "w_clamped"}, "stored nodes at every snapshot"},
        {"diagnostics.csv",
         {"t", "X", "width_eps", "speed_window"},
         "front position at level 1/2, eps-width, windowed slope of X"},
        {"sweep.csv",
         {"value", "speed", "max_width", "worst_sandwich_margin", "pass", "failed"},
         "one row per sweep variant; failed = 1 when the variant raised an error"},
    };
    return tables;
}

const CsvTable& csv_table(const std::string& file) {
    for (const auto& t : csv_schema())
        if (t.file == file) return t;
    throw Error(ErrorKind::internal, "no schema for " + file);
}

nlohmann::json schema_json() {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& t : csv_schema())
        j.push_back({{"file", t.file}, {"columns", t.columns}, {"description", t.description}, {"format", "%.17g"}});
    return j;
}

CsvWriter::CsvWriter(const std::filesystem::path& dir, const std::string& file) {
    const auto& table = csv_table(file);
    path_ = (dir / file).string();
    fp_ = std::fopen(path_.c_str(), "wb");
    if (!fp_) throw Error(ErrorKind::config, "cannot write " + path_);
    columns_ = table.columns.size();
    for (std::size_t i = 0; i < columns_; ++i) std::fprintf(fp_, i ? ",%s" : "%s", table.columns[i].c_str());
    std::fputc('\n', fp_);
}

CsvWriter::~CsvWriter() {
    if (fp_) std::fclose(fp_);
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) throw Error(ErrorKind::internal, path_ + ": wrong column count");
    for (std::size_t i = 0; i < values.size(); ++i) std::fprintf(fp_, i ? ",%.17g" : "%.17g", values[i]);
    std::fputc('\n', fp_);
}

void CsvWriter::close() {
    if (fp_ && std::fclose(fp_) != 0) {
        fp_ = nullptr;
        throw Error(ErrorKind::config, "write failed: " + path_);
    }
    fp_ = nullptr;
}

std::size_t CsvData::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error(ErrorKind::config, "missing CSV column " + name);
    return std::size_t(it - columns.begin());
}

CsvData read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot read " + path.string());
    CsvData d;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::config, path.string() + " is empty");
    std::stringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) d.columns.push_back(c);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(d.columns.size());
        const char* p = line.c_str();
        while (*p) {
            char* end = nullptr;
            row.push_back(std::strtod(p, &end));
            if (end == p) throw Error(ErrorKind::config, path.string() + ": bad number in '" + line + "'");
            p = *end == ',' ? end + 1 : end;
        }
        if (row.size() != d.columns.size()) throw Error(ErrorKind::config, path.string() + ": ragged row");
        d.rows.push_back(std::move(row));
    }
    return d;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorKind::config, "cannot write " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::config, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series) {
    const double W = 720, H = 440, l = 70, r = 170, t = 40, b = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x0 < x1)) {
        x0 = std::isfinite(x0) ? x0 - 1 : 0;
        x1 = x0 + 2;
    }
    if (!(y0 < y1)) {
        y0 = std::isfinite(y0) ? y0 - 1 : 0;
        y1 = y0 + 2;
    }
    const double pad = 0.04 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return l + (x - x0) / (x1 - x0) * (W - l - r); };
    auto py = [&](double y) { return H - b - (y - y0) / (y1 - y0) * (H - t - b); };

    std::ostringstream o;
    o.precision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
    o << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << W - l - r << "\" height=\"" << H - t - b
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        o << "<text x=\"" << px(xv) << "\" y=\"" << H - b + 16 << "\" text-anchor=\"middle\">" << fmt(xv)
          << "</text>\n";
        o << "<text x=\"" << l - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
        o << "<line x1=\"" << px(xv) << "\" y1=\"" << t << "\" x2=\"" << px(xv) << "\" y2=\"" << H - b
          << "\" stroke=\"#ddd\"/>\n";
        o << "<line x1=\"" << l << "\" y1=\"" << py(yv) << "\" x2=\"" << W - r << "\" y2=\"" << py(yv)
          << "\" stroke=\"#ddd\"/>\n";
    }
    o << "<text x=\"" << (l + W - r) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << esc(xlabel)
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << (t + H - b) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (t + H - b) / 2 << ")\">" << esc(ylabel) << "</text>\n";
    int k = 0;
    for (const auto& s : series) {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
          << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        const std::size_t step = std::max<std::size_t>(1, (s.x.size() + 1499) / 1500);
        auto point = [&](std::size_t i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        };
        for (std::size_t i = 0; i < s.x.size(); i += step) point(i);
        if (!s.x.empty() && (s.x.size() - 1) % step != 0) point(s.x.size() - 1);
        o << "\"/>\n";
        if (!s.label.empty()) {
            const double ly = t + 14 + 18 * k++;
            o << "<line x1=\"" << W - r + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - r + 34 << "\" y2=\"" << ly
              << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
              << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
            o << "<text x=\"" << W - r + 40 << "\" y=\"" << ly + 4 << "\">" << esc(s.label) << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace frontlab

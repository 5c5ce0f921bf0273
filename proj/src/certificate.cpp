#include "frontlab/certificate.hpp"

#include <cmath>

namespace frontlab {

namespace {

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? nlohmann::json("nan") : nlohmann::json(v > 0 ? "inf" : "-inf");
}

}  // namespace

nlohmann::json CertificateRecord::to_json() const {
    nlohmann::json j{{"name", name},
                     {"region", region},
                     {"worst_margin", number(worst_margin)},
                     {"tolerance", number(tolerance)},
                     {"pass", pass}};
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

CertificateRecord make_record(std::string name, std::string region, double worst_margin, double tolerance,
                              std::string detail) {
    CertificateRecord r{std::move(name), std::move(region), worst_margin, tolerance, false, std::move(detail)};
    r.pass = worst_margin >= -tolerance;
    return r;
}

nlohmann::json to_json(const std::vector<CertificateRecord>& records) {
    auto arr = nlohmann::json::array();
    for (const auto& r : records) arr.push_back(r.to_json());
    return arr;
}

bool all_pass(const std::vector<CertificateRecord>& records) {
    for (const auto& r : records)
        if (!r.pass) return false;
    return true;
}

}  // namespace frontlab

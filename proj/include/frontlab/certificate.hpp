#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace frontlab {

/// One machine-checked inequality. `worst_margin` is signed slack: positive
/// means the inequality holds with room, and the record passes when
/// worst_margin >= -tolerance.
struct CertificateRecord {
    std::string name;
    std::string region;
    double worst_margin = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;

    nlohmann::json to_json() const;
};

CertificateRecord make_record(std::string name, std::string region, double worst_margin, double tolerance,
                              std::string detail = {});

nlohmann::json to_json(const std::vector<CertificateRecord>& records);
bool all_pass(const std::vector<CertificateRecord>& records);

}  // namespace frontlab

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "kzfcs/sweep.hpp"

namespace kzfcs {

// Header: A,method,kappa1,kappa2,kappa3,kappa1_T,kappa2_T,kappa3_T,gamma,config_hash
inline constexpr const char* kRecordCsvHeader =
    "A,method,kappa1,kappa2,kappa3,kappa1_T,kappa2_T,kappa3_T,gamma,config_hash";

// Shortest text that parses back to the same double.
std::string format_double(double value);

void write_records_csv(std::ostream& out, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_records_csv(std::istream& in);

nlohmann::json records_json(const SweepConfig& cfg, const std::vector<SweepRecord>& records,
                            const std::vector<PowerLawFit>& fits, const std::vector<SweepFailure>& failures);

// pmf_A<value>_<method>.csv
std::string pmf_filename(double a, Method method);
void write_pmf_csv(std::ostream& out, const std::vector<double>& pmf);

struct EmittedFiles {
  std::vector<std::filesystem::path> paths;
};

// Writes config.json (effective configuration and hash), records.csv and/or
// records.json, PMF files for records that carry one, and failures.json when
// any record failed. Throws IoError with the path.
EmittedFiles emit(const SweepConfig& cfg, const std::vector<SweepRecord>& records,
                  const std::vector<PowerLawFit>& fits, const std::vector<SweepFailure>& failures,
                  const std::filesystem::path& dir, OutputFormat format);

}  // namespace kzfcs

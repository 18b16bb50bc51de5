#include "kzfcs/emit.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include "kzfcs/errors.hpp"

namespace kzfcs {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& text, std::size_t line) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("line " + std::to_string(line) + ": cannot parse number '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "': " + std::strerror(errno));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kRecordCsvHeader << '\n';
  for (const auto& r : records) {
    const Cumulants t = r.total_cumulants();
    out << format_double(r.a) << ',' << to_string(r.method) << ',' << format_double(r.cumulants.kappa1) << ','
        << format_double(r.cumulants.kappa2) << ',' << format_double(r.cumulants.kappa3) << ','
        << format_double(t.kappa1) << ',' << format_double(t.kappa2) << ',' << format_double(t.kappa3) << ','
        << format_double(r.gamma) << ',' << r.config_hash << '\n';
  }
}

std::vector<SweepRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordCsvHeader) {
    throw ValidationError("record CSV must start with header '" + std::string(kRecordCsvHeader) + "'");
  }
  std::vector<SweepRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected 10 fields, found " +
                            std::to_string(f.size()));
    }
    SweepRecord r;
    r.a = parse_double(f[0], lineno);
    r.method = method_from_string(f[1]);
    r.cumulants = {parse_double(f[2], lineno), parse_double(f[3], lineno), parse_double(f[4], lineno)};
    r.gamma = parse_double(f[8], lineno);
    r.config_hash = f[9];
    records.push_back(std::move(r));
  }
  return records;
}

nlohmann::json records_json(const SweepConfig& cfg, const std::vector<SweepRecord>& records,
                            const std::vector<PowerLawFit>& fits, const std::vector<SweepFailure>& failures) {
  nlohmann::json doc;
  doc["config"] = to_json(cfg);
  doc["config_hash"] = config_hash(cfg);
  auto& recs = doc["records"] = nlohmann::json::array();
  for (const auto& r : records) {
    const Cumulants t = r.total_cumulants();
    nlohmann::json j{{"A", r.a},
                     {"method", to_string(r.method)},
                     {"kappa1", r.cumulants.kappa1},
                     {"kappa2", r.cumulants.kappa2},
                     {"kappa3", r.cumulants.kappa3},
                     {"kappa1_T", t.kappa1},
                     {"kappa2_T", t.kappa2},
                     {"kappa3_T", t.kappa3},
                     {"gamma", r.gamma},
                     {"config_hash", r.config_hash},
                     {"started_at", r.started_at},
                     {"finished_at", r.finished_at}};
    if (r.pmf) j["pmf_file"] = pmf_filename(r.a, r.method);
    recs.push_back(std::move(j));
  }
  auto& fj = doc["fits"] = nlohmann::json::array();
  for (const auto& f : fits) {
    fj.push_back({{"q", f.q},
                  {"method", f.method ? nlohmann::json(to_string(*f.method)) : nlohmann::json(nullptr)},
                  {"exponent", f.exponent},
                  {"amplitude", f.amplitude},
                  {"stderr", f.stderr_exponent},
                  {"window", {f.window.lo, f.window.hi}},
                  {"points", f.points},
                  {"warnings", f.warnings}});
  }
  auto& fl = doc["failures"] = nlohmann::json::array();
  for (const auto& f : failures) fl.push_back({{"A", f.a}, {"method", to_string(f.method)}, {"error", f.message}});
  return doc;
}

std::string pmf_filename(double a, Method method) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "pmf_A%.6g_%s.csv", a, to_string(method).c_str());
  return buf;
}

void write_pmf_csv(std::ostream& out, const std::vector<double>& pmf) {
  out << "n,P\n";
  for (std::size_t n = 0; n < pmf.size(); ++n) out << n << ',' << format_double(pmf[n]) << '\n';
}

EmittedFiles emit(const SweepConfig& cfg, const std::vector<SweepRecord>& records,
                  const std::vector<PowerLawFit>& fits, const std::vector<SweepFailure>& failures,
                  const std::filesystem::path& dir, OutputFormat format) {
  if (records.empty() && failures.empty()) throw ValidationError("nothing to emit: no records");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  EmittedFiles files;
  {
    const auto path = dir / "config.json";
    auto out = open_for_write(path);
    nlohmann::json doc = to_json(cfg);
    doc["config_hash"] = config_hash(cfg);
    out << doc.dump(2) << '\n';
    finish(out, path);
    files.paths.push_back(path);
  }
  if (format == OutputFormat::Csv || format == OutputFormat::Both) {
    const auto path = dir / "records.csv";
    auto out = open_for_write(path);
    write_records_csv(out, records);
    finish(out, path);
    files.paths.push_back(path);
  }
  if (format == OutputFormat::Json || format == OutputFormat::Both) {
    const auto path = dir / "records.json";
    auto out = open_for_write(path);
    out << records_json(cfg, records, fits, failures).dump(2) << '\n';
    finish(out, path);
    files.paths.push_back(path);
  }
  for (const auto& r : records) {
    if (!r.pmf) continue;
    const auto path = dir / pmf_filename(r.a, r.method);
    auto out = open_for_write(path);
    write_pmf_csv(out, *r.pmf);
    finish(out, path);
    files.paths.push_back(path);
  }
  if (!failures.empty()) {
    const auto path = dir / "failures.json";
    auto out = open_for_write(path);
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& f : failures) doc.push_back({{"A", f.a}, {"method", to_string(f.method)}, {"error", f.message}});
    out << doc.dump(2) << '\n';
    finish(out, path);
    files.paths.push_back(path);
  }
  return files;
}

}  // namespace kzfcs

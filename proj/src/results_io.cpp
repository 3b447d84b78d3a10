#include "ubkde/results_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ubkde/error.hpp"

namespace ubkde {

namespace fs = std::filesystem;

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  if (s == "both") return OutputFormat::both;
  throw Error(ErrorKind::usage, "format must be csv, json or both, got '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::io, "cannot open '" + tmp + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw Error(ErrorKind::io, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "rename to '" + path + "' failed: " + ec.message());
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::io, "cannot create output directory '" + dir + "'");
  }
}

}  // namespace

nlohmann::json write_results(std::vector<OutputFile> files, const std::string& dir,
                             OutputFormat format) {
  ensure_dir(dir);
  std::erase_if(files, [&](const OutputFile& f) {
    if (f.is_volatile || f.name == "config.cfg") return false;
    if (format == OutputFormat::csv) return ends_with(f.name, ".json");
    if (format == OutputFormat::json) return ends_with(f.name, ".csv");
    return false;
  });
  std::sort(files.begin(), files.end(),
            [](const OutputFile& a, const OutputFile& b) { return a.name < b.name; });
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& f : files) {
    if (f.name == "manifest.json") throw Error(ErrorKind::io, "manifest.json is reserved");
    write_atomic((fs::path(dir) / f.name).string(), f.content);
    nlohmann::json e{{"name", f.name}};
    if (f.is_volatile) {
      e["volatile"] = true;
    } else {
      e["bytes"] = f.content.size();
      e["sha256"] = sha256_hex(f.content);
    }
    entries.push_back(std::move(e));
  }
  nlohmann::json manifest{{"files", entries}};
  write_atomic((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return manifest;
}

OutputFile config_file(const ExperimentConfig& cfg) { return {"config.cfg", cfg.echo(), false}; }

OutputFile run_info_file(const ExperimentConfig& cfg, const std::string& command,
                         double wall_clock_seconds) {
  std::ostringstream s;
  s << "command=" << command << "\nseed=" << cfg.seed << "\nworkers=" << cfg.workers
    << "\nwall_clock_seconds=" << format_double(wall_clock_seconds) << '\n';
  return {"run_info.txt", s.str(), true};
}

std::vector<OutputFile> experiment_files(const ExperimentResult& r, const ExperimentConfig& cfg) {
  std::vector<OutputFile> files;
  auto table = [](const std::vector<QuantileRow>& rows) {
    std::string s = "n,count,q10,q50,q90\n";
    for (const auto& q : rows) {
      s += std::to_string(q.n) + ',' + std::to_string(q.count) + ',' + format_double(q.q10) +
           ',' + format_double(q.q50) + ',' + format_double(q.q90) + '\n';
    }
    return s;
  };
  files.push_back({"quantiles.csv", table(r.quantiles)});
  if (!r.quantiles_fixed.empty()) files.push_back({"quantiles_fixed.csv", table(r.quantiles_fixed)});

  const bool rates = !r.quantiles_fixed.empty();
  const bool path = !r.paths.empty();
  std::string raw = path ? "path,n,delta_n,h_at_max,running_max\n"
                  : rates ? "n,replication,ratio,h_at_max,ratio_fixed,h_in_window\n"
                          : "n,replication,delta_n,h_at_max\n";
  for (const auto& x : r.raw) {
    if (path) {
      raw += std::to_string(x.replication) + ',' + std::to_string(x.n) + ',' +
             format_double(x.value) + ',' + format_double(x.h_at_max) + ',' +
             format_double(x.running_max) + '\n';
    } else {
      raw += std::to_string(x.n) + ',' + std::to_string(x.replication) + ',' +
             format_double(x.value) + ',' + format_double(x.h_at_max);
      if (rates) {
        raw += ',' + format_double(x.value_fixed) + ',' + (x.h_in_window ? "true" : "false");
      }
      raw += '\n';
    }
  }
  files.push_back({"raw.csv", raw});
  if (path) {
    std::string p = "path,relative_increase,stabilized\n";
    for (const auto& s : r.paths) {
      p += std::to_string(s.path) + ',' + format_double(s.relative_increase) + ',' +
           (s.stabilized ? "true" : "false") + '\n';
    }
    files.push_back({"paths.csv", p});
  }
  files.push_back({"summary.json", summary_json(r).dump(2) + "\n"});
  files.push_back(config_file(cfg));
  return files;
}

void write_error(const std::string& dir, const std::exception& e, int exit_code) {
  try {
    ensure_dir(dir);
    nlohmann::json j{{"message", e.what()}, {"exit_code", exit_code}};
    if (const auto* err = dynamic_cast<const Error*>(&e)) j["kind"] = to_string(err->kind());
    write_atomic((fs::path(dir) / "error.json").string(), j.dump(2) + "\n");
  } catch (...) {
  }
}

}  // namespace ubkde

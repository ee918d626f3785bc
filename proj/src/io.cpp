#include "calib/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace calib::io {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw IngestError("cannot parse '" + s + "' as a number", line_no);
  }
  return v;
}

json isotonic_to_json(const IsotonicFn& fn) {
  return json{{"breakpoints", fn.breakpoints()}, {"levels", fn.levels()}, {"eps", fn.eps()}};
}

IsotonicFn isotonic_from_json(const json& j) {
  return IsotonicFn(j.at("breakpoints").get<std::vector<double>>(),
                    j.at("levels").get<std::vector<double>>(), j.at("eps").get<double>());
}

}  // namespace

std::string format_full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_est(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Prediction files
// ---------------------------------------------------------------------------

LabeledDataset parse_prediction_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(ss, line)) {
    throw IngestError("empty prediction file");
  }
  ++line_no;
  const std::vector<std::string> header = split_csv_line(line);
  std::size_t L = 0;
  while (L < header.size() && header[L] == "z_" + std::to_string(L)) ++L;
  if (L < 2) {
    throw IngestError("header must start with columns z_0,z_1,...", line_no);
  }
  bool onehot = false;
  if (header.size() == L + 1 && header[L] == "label") {
    onehot = false;
  } else if (header.size() == 2 * L) {
    for (std::size_t l = 0; l < L; ++l) {
      if (header[L + l] != "y_" + std::to_string(l)) {
        throw IngestError("expected one-hot label columns y_0..y_" + std::to_string(L - 1),
                          line_no);
      }
    }
    onehot = true;
  } else {
    throw IngestError("header must end with 'label' or one-hot columns y_0..y_{L-1}",
                      line_no);
  }

  std::vector<ProbVector> predictions;
  std::vector<OneHotLabel> labels;
  while (std::getline(ss, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::size_t expected = onehot ? 2 * L : L + 1;
    if (fields.size() != expected) {
      throw IngestError("expected " + std::to_string(expected) + " fields, got " +
                        std::to_string(fields.size()), line_no);
    }
    std::vector<double> probs(L);
    for (std::size_t l = 0; l < L; ++l) probs[l] = parse_double(fields[l], line_no);

    std::size_t cls = 0;
    if (onehot) {
      int ones = 0;
      for (std::size_t l = 0; l < L; ++l) {
        const double y = parse_double(fields[L + l], line_no);
        if (std::abs(y - 1.0) < 1e-9) {
          cls = l;
          ++ones;
        } else if (std::abs(y) > 1e-9) {
          throw IngestError("one-hot entries must be 0 or 1", line_no);
        }
      }
      if (ones != 1) {
        throw IngestError("one-hot row must contain exactly one 1", line_no);
      }
    } else {
      const double raw = parse_double(fields[L], line_no);
      if (raw < 0 || raw > 1e9 || raw != std::floor(raw)) {
        throw IngestError("label must be a nonnegative integer", line_no);
      }
      cls = static_cast<std::size_t>(raw);
    }
    if (cls >= L) {
      throw IngestError("label " + std::to_string(cls) + " out of range for L = " +
                        std::to_string(L), line_no);
    }
    try {
      predictions.emplace_back(std::move(probs));
    } catch (const Error& e) {
      throw IngestError(e.what(), line_no);
    }
    labels.push_back(OneHotLabel{cls});
  }
  if (predictions.empty()) {
    throw IngestError("prediction file contains no data rows");
  }
  return LabeledDataset(std::move(predictions), std::move(labels));
}

LabeledDataset read_prediction_csv(const std::string& path) {
  return parse_prediction_csv(read_text_file(path));
}

std::string prediction_csv(const LabeledDataset& data) {
  std::string out;
  const std::size_t L = data.num_classes();
  for (std::size_t l = 0; l < L; ++l) {
    out += "z_" + std::to_string(l) + ",";
  }
  out += "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      out += format_full(data.prediction(i)[l]);
      out += ',';
    }
    out += std::to_string(data.label(i).class_index);
    out += '\n';
  }
  return out;
}

void write_prediction_csv(const std::string& path, const LabeledDataset& data) {
  write_text_file(path, prediction_csv(data));
}

// ---------------------------------------------------------------------------
// Fitted-map JSON
// ---------------------------------------------------------------------------

std::string map_json(const CalibrationMap& map) {
  json j;
  j["kind"] = map_kind(map);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TemperatureMap>) {
          j["t"] = m.t;
        } else if constexpr (std::is_same_v<T, EtsMap>) {
          j["t"] = m.t;
          j["w"] = m.w;
        } else if constexpr (std::is_same_v<T, IsotonicFn>) {
          j.update(isotonic_to_json(m));
        } else if constexpr (std::is_same_v<T, IrovaMap>) {
          json arr = json::array();
          for (const auto& fn : m.per_class) arr.push_back(isotonic_to_json(fn));
          j["per_class"] = std::move(arr);
        } else {
          j["t"] = m.inner.t;
          json arr = json::array();
          for (const auto& fn : m.outer.per_class) arr.push_back(isotonic_to_json(fn));
          j["per_class"] = std::move(arr);
        }
      },
      map);
  return j.dump(2) + "\n";
}

CalibrationMap map_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IngestError(std::string("invalid map JSON: ") + e.what());
  }
  const auto checked_t = [](double t) {
    if (!(t > 0.0)) throw IngestError("map temperature must be positive");
    return t;
  };
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ts") {
      return TemperatureMap{checked_t(j.at("t").get<double>())};
    }
    if (kind == "ets") {
      EtsMap m{checked_t(j.at("t").get<double>()),
               j.at("w").get<std::array<double, 3>>()};
      const double wsum = m.w[0] + m.w[1] + m.w[2];
      if (m.w[0] < 0 || m.w[1] < 0 || m.w[2] < 0 || std::abs(wsum - 1.0) > 1e-9) {
        throw IngestError("ensemble weights must be nonnegative and sum to 1");
      }
      return m;
    }
    if (kind == "irm") {
      return isotonic_from_json(j);
    }
    if (kind == "irova" || kind == "irova-ts") {
      IrovaMap irova;
      for (const auto& item : j.at("per_class")) {
        irova.per_class.push_back(isotonic_from_json(item));
      }
      if (kind == "irova") return irova;
      return ComposedMap{TemperatureMap{checked_t(j.at("t").get<double>())},
                         std::move(irova)};
    }
    throw IngestError("unknown map kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw IngestError(std::string("invalid map JSON: ") + e.what());
  }
}

void save_map(const std::string& path, const CalibrationMap& map) {
  write_text_file(path, map_json(map));
}

CalibrationMap load_map(const std::string& path) {
  return map_from_json_text(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Estimate rows
// ---------------------------------------------------------------------------

std::string ece_csv_header() { return "estimator,d,n_e,detail,value,stderr"; }

std::string ece_csv_row(const EceEstimate& est) {
  std::string row = estimator_kind_name(est.kind);
  row += ',' + std::to_string(est.d);
  row += ',' + std::to_string(est.n_e);
  row += ',' + est.detail;
  row += ',' + format_est(est.value);
  row += ',';
  if (est.stderr_value >= 0.0) row += format_est(est.stderr_value);
  return row;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IngestError("cannot open '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write '" + path + "'");
  }
  out << text;
}

}  // namespace calib::io

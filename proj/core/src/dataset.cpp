#include "rnf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace rnf {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no, const std::string& file) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error(file + ":" + std::to_string(line_no) + ": cannot parse '" + s +
                             "' as a number");
  }
  return value;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_day_first_date(const std::string& s) {
  // dd/mm/yyyy
  unsigned d = 0, m = 0, y = 0;
  char sep1 = 0, sep2 = 0;
  std::istringstream ss(s);
  ss >> d >> sep1 >> m >> sep2 >> y;
  return ss && sep1 == '/' && sep2 == '/' && d >= 1 && d <= 31 && m >= 1 && m <= 12 && y >= 1900;
}

}  // namespace

bool Trajectory::fully_observed() const {
  for (std::size_t t = 0; t < length; ++t) {
    if (!input_present[t] || !obs_present[t]) return false;
  }
  return true;
}

void Trajectory::validate() const {
  if (inputs.size() != length * input_dim || observations.size() != length * obs_dim ||
      input_present.size() != length || obs_present.size() != length) {
    throw std::invalid_argument("Trajectory: field sizes disagree with length " +
                                std::to_string(length));
  }
}

Trajectory make_trajectory(std::size_t length, std::size_t input_dim, std::size_t obs_dim) {
  Trajectory t;
  t.length = length;
  t.input_dim = input_dim;
  t.obs_dim = obs_dim;
  t.inputs.assign(length * input_dim, 0.0);
  t.observations.assign(length * obs_dim, 0.0);
  t.input_present.assign(length, 1);
  t.obs_present.assign(length, 1);
  return t;
}

Trajectory load_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split_line(trim(line), ',');

  std::vector<std::size_t> u_cols, y_cols;
  long u_mask_col = -1, y_mask_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name == "u_mask") {
      u_mask_col = static_cast<long>(i);
    } else if (name == "y_mask") {
      y_mask_col = static_cast<long>(i);
    } else if (name.starts_with("u_")) {
      u_cols.push_back(i);
    } else if (name.starts_with("y_")) {
      y_cols.push_back(i);
    } else {
      throw std::runtime_error(path.string() + ": unknown column '" + name + "'");
    }
  }
  if (u_cols.empty() || y_cols.empty()) {
    throw std::runtime_error(path.string() + ": header must name u_* and y_* columns");
  }

  std::vector<double> u_values, y_values;
  std::vector<std::uint8_t> u_present, y_present;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_line(t, ',');
    if (fields.size() != header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (std::size_t c : u_cols) u_values.push_back(parse_double(fields[c], line_no, path.string()));
    for (std::size_t c : y_cols) y_values.push_back(parse_double(fields[c], line_no, path.string()));
    u_present.push_back(u_mask_col < 0 ||
                        parse_double(fields[static_cast<std::size_t>(u_mask_col)], line_no, path.string()) != 0.0);
    y_present.push_back(y_mask_col < 0 ||
                        parse_double(fields[static_cast<std::size_t>(y_mask_col)], line_no, path.string()) != 0.0);
  }

  Trajectory traj = make_trajectory(u_present.size(), u_cols.size(), y_cols.size());
  traj.inputs = std::move(u_values);
  traj.observations = std::move(y_values);
  traj.input_present = std::move(u_present);
  traj.obs_present = std::move(y_present);
  traj.source = path.string();
  traj.validate();
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  traj.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory file " + path.string());
  out.precision(17);

  for (std::size_t i = 0; i < traj.input_dim; ++i) out << "u_" << (i + 1) << ",";
  for (std::size_t j = 0; j < traj.obs_dim; ++j) out << "y_" << (j + 1) << ",";
  out << "u_mask,y_mask\n";
  for (std::size_t t = 0; t < traj.length; ++t) {
    for (std::size_t i = 0; i < traj.input_dim; ++i) out << traj.inputs[t * traj.input_dim + i] << ",";
    for (std::size_t j = 0; j < traj.obs_dim; ++j) out << traj.observations[t * traj.obs_dim + j] << ",";
    out << int(traj.input_present[t]) << "," << int(traj.obs_present[t]) << "\n";
  }
}

Trajectory load_electricity(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open electricity file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split_line(trim(line), ';');
  if (header.size() != 9 || trim(header[0]) != "Date" || trim(header[2]) != "Global_active_power") {
    throw std::runtime_error(path.string() + ": unexpected header for the UCI power file");
  }

  // Field order in the file: Date;Time;active;reactive;voltage;intensity;sub1;sub2;sub3.
  // Model inputs are ordered reactive, intensity, voltage, sub1..sub3.
  static constexpr std::size_t kInputFields[6] = {3, 5, 4, 6, 7, 8};

  std::vector<double> u_values, y_values;
  std::vector<std::uint8_t> present;
  std::string first_date, last_date;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_line(t, ';');
    if (fields.size() != 9) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 9 fields, got " +
                               std::to_string(fields.size()));
    }
    if (!parse_day_first_date(fields[0])) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad day-first date '" + fields[0] + "'");
    }
    if (first_date.empty()) first_date = fields[0] + " " + fields[1];
    last_date = fields[0] + " " + fields[1];

    bool missing = false;
    for (std::size_t i = 2; i < 9; ++i) {
      const std::string v = trim(fields[i]);
      if (v == "?" || v.empty()) {
        missing = true;
        break;
      }
    }
    if (missing) {
      y_values.push_back(0.0);
      for (std::size_t i = 0; i < 6; ++i) u_values.push_back(0.0);
      present.push_back(0);
      continue;
    }
    y_values.push_back(parse_double(trim(fields[2]), line_no, path.string()));
    for (std::size_t f : kInputFields) {
      u_values.push_back(parse_double(trim(fields[f]), line_no, path.string()));
    }
    present.push_back(1);
  }

  Trajectory traj = make_trajectory(present.size(), 6, 1);
  traj.inputs = std::move(u_values);
  traj.observations = std::move(y_values);
  traj.input_present = present;
  traj.obs_present = std::move(present);
  traj.source = "uci-power " + first_date + " .. " + last_date;
  traj.validate();
  return traj;
}

namespace {
Trajectory slice(const Trajectory& traj, std::size_t begin, std::size_t end) {
  Trajectory out = make_trajectory(end - begin, traj.input_dim, traj.obs_dim);
  std::copy(traj.inputs.begin() + begin * traj.input_dim, traj.inputs.begin() + end * traj.input_dim,
            out.inputs.begin());
  std::copy(traj.observations.begin() + begin * traj.obs_dim,
            traj.observations.begin() + end * traj.obs_dim, out.observations.begin());
  std::copy(traj.input_present.begin() + begin, traj.input_present.begin() + end,
            out.input_present.begin());
  std::copy(traj.obs_present.begin() + begin, traj.obs_present.begin() + end,
            out.obs_present.begin());
  out.source = traj.source;
  return out;
}
}  // namespace

Split chronological_split(const Trajectory& traj, SplitFractions f) {
  if (std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) {
    throw std::invalid_argument("chronological_split: fractions must sum to 1");
  }
  if (traj.length < 3) {
    throw std::invalid_argument("chronological_split: trajectory shorter than 3 steps");
  }
  const auto T = static_cast<double>(traj.length);
  const auto b1 = static_cast<std::size_t>(std::floor(f.train * T));
  const auto b2 = static_cast<std::size_t>(std::floor((f.train + f.validation) * T));
  Split s;
  s.train = slice(traj, 0, b1);
  s.validation = slice(traj, b1, b2);
  s.test = slice(traj, b2, traj.length);
  return s;
}

std::string norm_method_name(NormMethod m) {
  switch (m) {
    case NormMethod::None: return "none";
    case NormMethod::Zscore: return "zscore";
    case NormMethod::Minmax: return "minmax";
    case NormMethod::Ewm: return "ewm";
  }
  return "none";
}

NormMethod norm_method_from_name(const std::string& name) {
  if (name == "none") return NormMethod::None;
  if (name == "zscore") return NormMethod::Zscore;
  if (name == "minmax") return NormMethod::Minmax;
  if (name == "ewm") return NormMethod::Ewm;
  throw std::invalid_argument("unknown normalisation method '" + name + "'");
}

namespace {

// Per-feature view over a trajectory: features 0..I-1 are inputs,
// I..I+O-1 are observations.
double feature_at(const Trajectory& t, std::size_t feature, std::size_t step) {
  if (feature < t.input_dim) return t.inputs[step * t.input_dim + feature];
  return t.observations[step * t.obs_dim + (feature - t.input_dim)];
}

void set_feature(Trajectory& t, std::size_t feature, std::size_t step, double v) {
  if (feature < t.input_dim) {
    t.inputs[step * t.input_dim + feature] = v;
  } else {
    t.observations[step * t.obs_dim + (feature - t.input_dim)] = v;
  }
}

bool feature_present(const Trajectory& t, std::size_t feature, std::size_t step) {
  return feature < t.input_dim ? t.input_present[step] != 0 : t.obs_present[step] != 0;
}

constexpr double kEwmFloor = 1e-12;

// Causal EWM scaling of observation features: step t is divided by the
// trailing deviation of steps < t, so the transform inverts exactly by
// reconstructing forward.
void ewm_transform(Trajectory& out, const Trajectory& in, double halflife, bool forward) {
  const double lambda = std::exp2(-1.0 / halflife);
  for (std::size_t j = 0; j < in.obs_dim; ++j) {
    double var = 1.0;
    for (std::size_t t = 0; t < in.length; ++t) {
      const double divisor = std::max(std::sqrt(var), kEwmFloor);
      const double raw = in.observations[t * in.obs_dim + j];
      double original;
      if (forward) {
        original = raw;
        out.observations[t * out.obs_dim + j] = raw / divisor;
      } else {
        original = raw * divisor;
        out.observations[t * out.obs_dim + j] = original;
      }
      if (in.obs_present[t]) var = lambda * var + (1.0 - lambda) * original * original;
    }
  }
}

}  // namespace

std::pair<Trajectory, NormStats> normalize(const Trajectory& traj, NormMethod method,
                                           const Trajectory& fitted_on) {
  NormStats stats;
  stats.method = method;
  const std::size_t F = traj.input_dim + traj.obs_dim;
  stats.offset.assign(F, 0.0);
  stats.scale.assign(F, 1.0);

  if (method == NormMethod::Zscore || method == NormMethod::Minmax) {
    if (fitted_on.input_dim != traj.input_dim || fitted_on.obs_dim != traj.obs_dim) {
      throw std::invalid_argument("normalize: fitting partition has different dimensions");
    }
    for (std::size_t f = 0; f < F; ++f) {
      double mean = 0.0, m2 = 0.0, lo = 0.0, hi = 0.0;
      std::size_t n = 0;
      for (std::size_t t = 0; t < fitted_on.length; ++t) {
        if (!feature_present(fitted_on, f, t)) continue;
        const double v = feature_at(fitted_on, f, t);
        ++n;
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
        lo = n == 1 ? v : std::min(lo, v);
        hi = n == 1 ? v : std::max(hi, v);
      }
      if (n == 0) throw std::invalid_argument("normalize: feature " + std::to_string(f) +
                                              " has no observed training values");
      if (method == NormMethod::Zscore) {
        const double sd = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
        stats.offset[f] = mean;
        if (sd > 0.0) {
          stats.scale[f] = sd;
        } else {
          std::cerr << "warning: feature " << f << " has zero variance; left unscaled\n";
          stats.scale[f] = 1.0;
        }
      } else {
        stats.offset[f] = lo;
        stats.scale[f] = hi > lo ? hi - lo : 1.0;
        if (hi <= lo) std::cerr << "warning: feature " << f << " has zero range; left unscaled\n";
      }
    }
  }

  return {apply_normalization(traj, stats), stats};
}

Trajectory apply_normalization(const Trajectory& traj, const NormStats& stats) {
  Trajectory out = traj;
  const std::size_t F = traj.input_dim + traj.obs_dim;
  switch (stats.method) {
    case NormMethod::None:
      break;
    case NormMethod::Zscore:
    case NormMethod::Minmax:
      if (stats.offset.size() != F || stats.scale.size() != F) {
        throw std::invalid_argument("apply_normalization: stats sized for a different trajectory");
      }
      for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t t = 0; t < traj.length; ++t) {
          set_feature(out, f, t, (feature_at(traj, f, t) - stats.offset[f]) / stats.scale[f]);
        }
      }
      break;
    case NormMethod::Ewm:
      ewm_transform(out, traj, stats.ewm_halflife, true);
      break;
  }
  return out;
}

Trajectory invert_normalization(const Trajectory& traj, const NormStats& stats) {
  Trajectory out = traj;
  const std::size_t F = traj.input_dim + traj.obs_dim;
  switch (stats.method) {
    case NormMethod::None:
      break;
    case NormMethod::Zscore:
    case NormMethod::Minmax:
      for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t t = 0; t < traj.length; ++t) {
          set_feature(out, f, t, feature_at(traj, f, t) * stats.scale[f] + stats.offset[f]);
        }
      }
      break;
    case NormMethod::Ewm:
      ewm_transform(out, traj, stats.ewm_halflife, false);
      break;
  }
  return out;
}

std::vector<double> realized_variance_series(std::span<const double> log_prices,
                                             std::size_t window, SpikeRule rule) {
  if (window < 1) throw std::invalid_argument("realized_variance_series: window must be >= 1");
  for (double p : log_prices) {
    if (!std::isfinite(p)) throw std::invalid_argument("realized_variance_series: non-finite log price");
  }
  if (log_prices.size() < window + 1) return {};

  const std::size_t n_returns = log_prices.size() - 1;
  std::vector<double> sq(n_returns);
  for (std::size_t k = 0; k < n_returns; ++k) {
    const double r = log_prices[k + 1] - log_prices[k];
    sq[k] = r * r;
  }

  std::vector<double> rv(n_returns - window + 1);
  double acc = 0.0;
  for (std::size_t k = 0; k < window; ++k) acc += sq[k];
  rv[0] = acc;
  for (std::size_t k = window; k < n_returns; ++k) {
    acc += sq[k] - sq[k - window];
    rv[k - window + 1] = acc;
  }

  if (rule.enabled) {
    // Trailing sd over up to `rule.window` prior (already filtered) values.
    for (std::size_t t = 1; t < rv.size(); ++t) {
      const std::size_t begin = t > rule.window ? t - rule.window : 0;
      const std::size_t n = t - begin;
      if (n < 2) continue;
      double mean = 0.0;
      for (std::size_t k = begin; k < t; ++k) mean += rv[k];
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t k = begin; k < t; ++k) ss += (rv[k] - mean) * (rv[k] - mean);
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      if (rv[t] > rule.multiple * sd) rv[t] = rv[t - 1];
    }
  }
  return rv;
}

QuoteFeatures microstructure_features(double bid_price, double ask_price, double bid_volume,
                                      double ask_volume) {
  const double total = bid_volume + ask_volume;
  if (!(total > 0.0)) {
    throw std::invalid_argument("microstructure_features: total volume must be positive");
  }
  QuoteFeatures f;
  f.microprice = (ask_volume * bid_price + bid_volume * ask_price) / total;
  f.imbalance = (bid_volume - ask_volume) / total;
  return f;
}

Trajectory microstructure_trajectory(std::span<const double> bid_price,
                                     std::span<const double> ask_price,
                                     std::span<const double> bid_volume,
                                     std::span<const double> ask_volume) {
  const std::size_t n = bid_price.size();
  if (ask_price.size() != n || bid_volume.size() != n || ask_volume.size() != n) {
    throw std::invalid_argument("microstructure_trajectory: series lengths differ");
  }
  if (n < 2) throw std::invalid_argument("microstructure_trajectory: need at least two quotes");

  std::vector<double> microprice(n), imbalance(n);
  for (std::size_t t = 0; t < n; ++t) {
    const QuoteFeatures f = microstructure_features(bid_price[t], ask_price[t], bid_volume[t], ask_volume[t]);
    microprice[t] = f.microprice;
    imbalance[t] = f.imbalance;
  }

  Trajectory traj = make_trajectory(n - 1, 1, 1);
  for (std::size_t t = 1; t < n; ++t) {
    traj.observations[t - 1] = (microprice[t] - microprice[t - 1]) / microprice[t - 1];
    traj.inputs[t - 1] = imbalance[t];
  }
  traj.source = "quotes";
  return traj;
}

std::vector<std::size_t> session_filter(std::span<const double> seconds_of_day) {
  constexpr double kOpen = 8.5 * 3600.0;
  constexpr double kClose = 16.0 * 3600.0;
  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < seconds_of_day.size(); ++t) {
    if (seconds_of_day[t] >= kOpen && seconds_of_day[t] <= kClose) keep.push_back(t);
  }
  return keep;
}

}  // namespace rnf

// Copyright 2026 The phonovc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "phonovc/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "phonovc/error.hpp"

namespace phonovc {
namespace {

const DurationProfile& find_profile(const ProfileSet& set,
                                    const std::string& speaker,
                                    const std::string& id, const char* which) {
  auto it = set.find(speaker);
  PHONOVC_CHECK(it != set.end(), ConfigError, "missing pairing: no ", which,
                " profiles for speaker '", speaker, "'");
  for (const auto& p : it->second) {
    if (p.utterance_id == id) return p;
  }
  throw ConfigError(detail::concat("missing pairing: no ", which,
                                   " profile for utterance '", id,
                                   "' of speaker '", speaker, "'"));
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

double DurationProfile::avg_phoneme_duration() const {
  PHONOVC_CHECK(!durations.empty(), AlignmentError, "profile '", utterance_id,
                "' has no phonemes");
  const long total = std::accumulate(durations.begin(), durations.end(), 0L);
  return double(total) / double(durations.size());
}

double rdd(double d_conv, double d_ref) {
  PHONOVC_CHECK(d_ref > 0.0 && std::isfinite(d_ref), ConfigError,
                "rdd: reference duration must be positive, got ", d_ref);
  PHONOVC_CHECK(d_conv >= 0.0 && std::isfinite(d_conv), ConfigError,
                "rdd: converted duration must be non-negative, got ", d_conv);
  return std::abs(d_conv - d_ref) / d_ref * 100.0;
}

RddReport rdd_report(const ProfileSet& conv, const ProfileSet& source,
                     const ProfileSet& target) {
  PHONOVC_CHECK(!conv.empty(), ConfigError, "rdd_report: no converted profiles");
  RddReport report;
  for (const auto& [speaker, profiles] : conv) {
    PHONOVC_CHECK(!profiles.empty(), ConfigError, "rdd_report: speaker '",
                  speaker, "' has no converted profiles");
    RddRow row;
    row.speaker = speaker;
    for (const auto& p : profiles) {
      const double dc = p.avg_phoneme_duration();
      const double ds =
          find_profile(source, speaker, p.utterance_id, "source").avg_phoneme_duration();
      const double dt =
          find_profile(target, speaker, p.utterance_id, "target").avg_phoneme_duration();
      row.rdd_source += rdd(dc, ds);
      row.rdd_target += rdd(dc, dt);
      row.rdd_source_target += rdd(ds, dt);
    }
    row.utterances = static_cast<int>(profiles.size());
    row.rdd_source /= row.utterances;
    row.rdd_target /= row.utterances;
    row.rdd_source_target /= row.utterances;
    report.rows.push_back(row);
  }
  RddRow& avg = report.average;
  avg.speaker = "Average";
  for (const auto& r : report.rows) {
    avg.rdd_source += r.rdd_source;
    avg.rdd_target += r.rdd_target;
    avg.rdd_source_target += r.rdd_source_target;
    avg.utterances += r.utterances;
  }
  const double n = double(report.rows.size());
  avg.rdd_source /= n;
  avg.rdd_target /= n;
  avg.rdd_source_target /= n;
  report.note =
      "Averages are unweighted arithmetic means of the speaker rows; a mean "
      "weighted by utterance count can differ.";
  return report;
}

std::string RddReport::to_text() const {
  std::ostringstream out;
  out << "speaker\tutterances\trdd_source%\trdd_target%\trdd_source_target%\n";
  auto line = [&out](const RddRow& r) {
    out << r.speaker << '\t' << r.utterances << '\t' << pct(r.rdd_source) << '\t'
        << pct(r.rdd_target) << '\t' << pct(r.rdd_source_target) << '\n';
  };
  for (const auto& r : rows) line(r);
  line(average);
  out << "# " << note << '\n';
  return out.str();
}

std::vector<DurationProfile> parse_profiles(const std::string& text,
                                            const std::string& origin) {
  std::vector<DurationProfile> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    DurationProfile p;
    if (!(fields >> p.utterance_id)) continue;
    std::string tok;
    while (fields >> tok) {
      int d = 0;
      try {
        size_t used = 0;
        d = std::stoi(tok, &used);
        PHONOVC_CHECK(used == tok.size(), IoError, "");
      } catch (const std::exception&) {
        throw IoError(detail::concat(origin, ":", number, ": bad duration '",
                                     tok, "'"));
      }
      PHONOVC_CHECK(d >= 1, IoError, origin, ":", number,
                    ": durations must be >= 1, got ", d);
      p.durations.push_back(d);
    }
    PHONOVC_CHECK(!p.durations.empty(), IoError, origin, ":", number,
                  ": utterance '", p.utterance_id, "' has no durations");
    PHONOVC_CHECK(seen.insert(p.utterance_id).second, IoError, origin, ":",
                  number, ": duplicate utterance '", p.utterance_id, "'");
    out.push_back(std::move(p));
  }
  return out;
}

ProfileSet read_profiles(const std::string& dir) {
  namespace fs = std::filesystem;
  PHONOVC_CHECK(fs::is_directory(dir), IoError, "profile directory '", dir,
                "' not found");
  ProfileSet set;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    PHONOVC_CHECK(in.good(), IoError, "cannot read ", entry.path().string());
    std::stringstream buf;
    buf << in.rdbuf();
    set[entry.path().stem().string()] = parse_profiles(buf.str(), entry.path().string());
  }
  return set;
}

void write_profiles(const std::string& dir, const ProfileSet& profiles) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& [speaker, list] : profiles) {
    const fs::path path = fs::path(dir) / (speaker + ".txt");
    std::ofstream out(path);
    PHONOVC_CHECK(out.good(), IoError, "cannot write ", path.string());
    for (const auto& p : list) {
      out << p.utterance_id;
      for (int d : p.durations) out << ' ' << d;
      out << '\n';
    }
  }
}

std::optional<double> MetricColumn::mean() const {
  double s = 0.0;
  int n = 0;
  for (const auto& v : scores) {
    if (v) {
      s += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / n;
}

MetricRegistry::Handle MetricRegistry::register_metric(const std::string& name,
                                                       MetricClient client) {
  PHONOVC_CHECK(!name.empty(), ConfigError, "metric name must not be empty");
  PHONOVC_CHECK(static_cast<bool>(client), ConfigError, "metric '", name,
                "' has no client");
  PHONOVC_CHECK(!contains(name), ConfigError, "metric '", name,
                "' is already registered");
  clients_.emplace(name, std::move(client));
  return {name};
}

std::vector<std::string> MetricRegistry::list() const {
  std::vector<std::string> names;
  for (const auto& [name, client] : clients_) names.push_back(name);
  return names;
}

MetricColumn MetricRegistry::evaluate(const std::string& name,
                                      const std::vector<MetricInput>& inputs) const {
  auto it = clients_.find(name);
  PHONOVC_CHECK(it != clients_.end(), ConfigError, "unknown metric '", name, "'");
  MetricColumn col;
  col.metric = name;
  for (const auto& in : inputs) {
    col.utterance_ids.push_back(in.utterance_id);
    try {
      const double v = it->second(in.audio, in.reference);
      PHONOVC_CHECK(std::isfinite(v), NumericError, "non-finite score");
      col.scores.emplace_back(v);
      col.errors.emplace_back();
    } catch (const std::exception& e) {
      col.scores.emplace_back(std::nullopt);
      col.errors.emplace_back(e.what());
    }
  }
  return col;
}

void register_builtin_metrics(MetricRegistry& registry) {
  registry.register_metric("length_ratio", [](const Audio& a, const Audio& ref) {
    PHONOVC_CHECK(!ref.samples.empty(), ConfigError, "empty reference audio");
    return double(a.samples.size()) / double(ref.samples.size());
  });
}

}  // namespace phonovc

// Copyright 2026 The NNMPC Authors
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

#include "core/dataset.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/io.hpp"

namespace nnmpc {
namespace {

using json = nlohmann::json;

constexpr int kColumns = 5 * kJoints;

std::string header() {
  std::string h;
  const char* groups[] = {"q", "qd", "u", "dq", "dqd"};
  for (const char* g : groups) {
    for (int j = 1; j <= kJoints; ++j) {
      if (!h.empty()) h += ',';
      h += g + std::to_string(j);
    }
  }
  return h;
}

std::string row_error(std::size_t row, const std::string& what) {
  return "dataset row " + std::to_string(row) + ": " + what;
}

json state_json(const JointState& s) {
  return {{"q", {s.q(0), s.q(1), s.q(2), s.q(3)}},
          {"qd", {s.qd(0), s.qd(1), s.qd(2), s.qd(3)}}};
}

JointState state_from_json(const json& j) {
  JointState s;
  for (int k = 0; k < kJoints; ++k) {
    s.q(k) = j.at("q").at(k).get<double>();
    s.qd(k) = j.at("qd").at(k).get<double>();
  }
  return s;
}

}  // namespace

std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

void validate(const Dataset& data) {
  if (!(data.sample_period > 0.0)) {
    throw Error(ErrorCode::kSchema, "dataset: sample period must be > 0");
  }
  std::size_t total = 0;
  for (const EpisodeInfo& ep : data.episodes) {
    if (ep.rows < 0) throw Error(ErrorCode::kSchema, "dataset: negative episode size");
    total += static_cast<std::size_t>(ep.rows);
  }
  if (total != data.rows.size()) {
    throw Error(ErrorCode::kSchema, "dataset: episode sizes do not add up to the row count");
  }
  std::size_t first = 0;
  for (const EpisodeInfo& ep : data.episodes) {
    for (std::size_t k = first; k < first + ep.rows; ++k) {
      const Transition& row = data.rows[k];
      if (!row.state.finite() || !row.u.allFinite()) {
        throw Error(ErrorCode::kSchema, row_error(k, "non-finite entry"));
      }
      const JointState& next =
          (k + 1 < first + ep.rows) ? data.rows[k + 1].state : ep.terminal;
      if ((next.q - row.state.q) != row.delta.dq ||
          (next.qd - row.state.qd) != row.delta.dqd) {
        throw Error(ErrorCode::kSchema,
                    row_error(k, "delta does not match consecutive states"));
      }
    }
    first += ep.rows;
  }
}

void save_dataset(const Dataset& data, const std::filesystem::path& csv) {
  validate(data);
  std::string out = header() + "\n";
  out.reserve(data.rows.size() * kColumns * 24);
  for (const Transition& row : data.rows) {
    const Vec4* groups[] = {&row.state.q, &row.state.qd, &row.u, &row.delta.dq,
                            &row.delta.dqd};
    bool first = true;
    for (const Vec4* g : groups) {
      for (int j = 0; j < kJoints; ++j) {
        if (!first) out += ',';
        first = false;
        out += format_number((*g)(j), 17);
      }
    }
    out += '\n';
  }
  write_text_file(csv, out);

  json meta;
  meta["sample_period"] = data.sample_period;
  meta["scenario"] = data.scenario;
  meta["seed"] = data.seed;
  meta["rows"] = data.rows.size();
  meta["discarded_episodes"] = data.discarded_episodes;
  meta["episodes"] = json::array();
  for (const EpisodeInfo& ep : data.episodes) {
    meta["episodes"].push_back({{"kind", ep.kind},
                                {"rows", ep.rows},
                                {"clamp_events", ep.clamp_events},
                                {"terminal", state_json(ep.terminal)}});
  }
  write_text_file(metadata_path(csv), meta.dump(1) + "\n");
}

Dataset load_dataset(const std::filesystem::path& csv) {
  Dataset data;
  json meta;
  try {
    meta = json::parse(read_text_file(metadata_path(csv)));
    data.sample_period = meta.at("sample_period").get<double>();
    data.scenario = meta.at("scenario").get<std::string>();
    data.seed = meta.at("seed").get<std::uint64_t>();
    data.discarded_episodes = meta.value("discarded_episodes", 0);
    for (const json& ep : meta.at("episodes")) {
      EpisodeInfo info;
      info.kind = ep.at("kind").get<std::string>();
      info.rows = ep.at("rows").get<int>();
      info.clamp_events = ep.value("clamp_events", 0);
      info.terminal = state_from_json(ep.at("terminal"));
      data.episodes.push_back(info);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema,
                "dataset metadata " + metadata_path(csv).string() + ": " + e.what());
  }

  const std::string text = read_text_file(csv);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line).size() != kColumns) {
    throw Error(ErrorCode::kSchema, "dataset: bad header in " + csv.string());
  }
  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != kColumns) {
      throw Error(ErrorCode::kSchema, row_error(row_index, "expected 20 columns"));
    }
    Transition row;
    Vec4* groups[] = {&row.state.q, &row.state.qd, &row.u, &row.delta.dq,
                      &row.delta.dqd};
    for (int g = 0; g < 5; ++g) {
      for (int j = 0; j < kJoints; ++j) {
        (*groups[g])(j) = parse_number(fields[g * kJoints + j],
                                       "dataset row " + std::to_string(row_index));
      }
    }
    data.rows.push_back(row);
    ++row_index;
  }
  validate(data);
  return data;
}

}  // namespace nnmpc

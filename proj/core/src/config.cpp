/* Copyright 2026 The Ghostpatch Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ghostpatch/config.hpp"

#include <set>

#include "ghostpatch/codec.hpp"
#include "ghostpatch/errors.hpp"
#include "json.hpp"

namespace ghostpatch {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw InvalidArgument("unknown field '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json selection_json(const SelectionConfig& s) {
  return {{"cell_size", s.cell_size},
          {"count_threshold", s.count_threshold},
          {"trials", s.trials},
          {"revert_probability", s.revert_probability},
          {"min_score", s.min_score},
          {"candidate_pool", s.candidate_pool},
          {"min_objects", s.min_objects},
          {"max_objects", s.max_objects},
          {"transform_probability", s.transform_probability},
          {"patch_transform", s.patch_transform.tag()}};
}

void read_selection(const json& j, SelectionConfig& s) {
  reject_unknown(j,
                 {"cell_size", "count_threshold", "trials", "revert_probability",
                  "min_score", "candidate_pool", "min_objects", "max_objects",
                  "transform_probability", "patch_transform"},
                 "selection");
  read(j, "cell_size", s.cell_size);
  read(j, "count_threshold", s.count_threshold);
  read(j, "trials", s.trials);
  read(j, "revert_probability", s.revert_probability);
  read(j, "min_score", s.min_score);
  read(j, "candidate_pool", s.candidate_pool);
  read(j, "min_objects", s.min_objects);
  read(j, "max_objects", s.max_objects);
  read(j, "transform_probability", s.transform_probability);
  if (j.contains("patch_transform")) {
    s.patch_transform =
        ColorTransform::parse(j.at("patch_transform").get<std::string>());
  }
}

json projection_json(const ProjectionParams& p) {
  return {{"ineligible_scale", p.ineligible_scale},
          {"dropout_density", p.dropout_density},
          {"eligible_scale", p.eligible_scale},
          {"offset_policy",
           p.offset_policy == OffsetPolicy::kRecenter ? "recenter" : "fixed"},
          {"fixed_offset", p.fixed_offset},
          {"iterations", p.iterations},
          {"max_stage_retries", p.max_stage_retries}};
}

void read_projection(const json& j, ProjectionParams& p) {
  reject_unknown(j,
                 {"ineligible_scale", "dropout_density", "eligible_scale",
                  "offset_policy", "fixed_offset", "iterations",
                  "max_stage_retries"},
                 "projection");
  read(j, "ineligible_scale", p.ineligible_scale);
  read(j, "dropout_density", p.dropout_density);
  read(j, "eligible_scale", p.eligible_scale);
  read(j, "fixed_offset", p.fixed_offset);
  read(j, "iterations", p.iterations);
  read(j, "max_stage_retries", p.max_stage_retries);
  if (j.contains("offset_policy")) {
    const auto v = j.at("offset_policy").get<std::string>();
    if (v == "recenter") {
      p.offset_policy = OffsetPolicy::kRecenter;
    } else if (v == "fixed") {
      p.offset_policy = OffsetPolicy::kFixed;
    } else {
      throw InvalidArgument("offset_policy must be 'recenter' or 'fixed'");
    }
  }
}

json parse_document(std::string_view text, const char* what) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw InvalidArgument(std::string(what) + " is not valid JSON");
  return j;
}

}  // namespace

std::string attack_config_json(const AttackConfig& cfg) {
  json j = {{"epsilon", cfg.epsilon},
            {"max_queries", cfg.max_queries},
            {"success_increment", cfg.success_increment},
            {"seed", cfg.seed},
            {"selection", selection_json(cfg.selection)},
            {"projection", projection_json(cfg.projection)},
            {"schedule", cfg.schedule.stages}};
  return j.dump();
}

AttackConfig parse_attack_config(std::string_view text) {
  const json j = parse_document(text, "attack config");
  AttackConfig cfg;
  try {
    reject_unknown(j,
                   {"epsilon", "max_queries", "success_increment", "seed",
                    "selection", "projection", "schedule"},
                   "attack config");
    read(j, "epsilon", cfg.epsilon);
    read(j, "max_queries", cfg.max_queries);
    read(j, "success_increment", cfg.success_increment);
    read(j, "seed", cfg.seed);
    if (j.contains("selection")) read_selection(j.at("selection"), cfg.selection);
    if (j.contains("projection")) read_projection(j.at("projection"), cfg.projection);
    read(j, "schedule", cfg.schedule.stages);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("attack config: ") + e.what());
  }
  cfg.selection.epsilon = cfg.epsilon;
  cfg.projection.epsilon = cfg.epsilon;
  cfg.validate();
  return cfg;
}

AttackConfig load_attack_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_attack_config(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

MockServiceConfig parse_mock_config(std::string_view text) {
  const json j = parse_document(text, "mock config");
  MockServiceConfig out;
  MockDetectorConfig& d = out.detector;
  try {
    reject_unknown(j,
                   {"model_id", "correlation_threshold", "score_threshold",
                    "nms_iou", "min_size_fraction", "stride", "box_sizes",
                    "min_contrast", "template_seed", "server"},
                   "mock config");
    read(j, "model_id", d.model_id);
    read(j, "correlation_threshold", d.correlation_threshold);
    read(j, "score_threshold", d.score_threshold);
    read(j, "nms_iou", d.nms_iou);
    read(j, "min_size_fraction", d.min_size_fraction);
    read(j, "stride", d.stride);
    read(j, "box_sizes", d.box_sizes);
    read(j, "min_contrast", d.min_contrast);
    if (j.contains("template_seed")) {
      d.templates = default_templates(j.at("template_seed").get<std::uint64_t>());
    }
    if (j.contains("server")) {
      const json& s = j.at("server");
      reject_unknown(s, {"max_payload_bytes", "rate_limit_per_second", "resize_to"},
                     "server");
      read(s, "max_payload_bytes", out.server.max_payload_bytes);
      read(s, "rate_limit_per_second", out.server.rate_limit_per_second);
      if (s.contains("resize_to") && !s.at("resize_to").is_null()) {
        const auto hw = s.at("resize_to").get<std::array<int, 2>>();
        if (hw[0] <= 0 || hw[1] <= 0) {
          throw InvalidArgument("server.resize_to must be positive");
        }
        out.server.resize_to = std::make_pair(hw[0], hw[1]);
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("mock config: ") + e.what());
  }
  d.validate();
  return out;
}

MockServiceConfig load_mock_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_mock_config(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace ghostpatch

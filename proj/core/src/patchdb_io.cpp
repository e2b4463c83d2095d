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

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "ghostpatch/codec.hpp"
#include "ghostpatch/digest.hpp"
#include "ghostpatch/errors.hpp"
#include "ghostpatch/patchdb.hpp"
#include "json.hpp"

namespace ghostpatch {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json box_json(const RegionRect& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

RegionRect box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw IoError("index.json: bad box");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

json detections_json(const std::vector<Detection>& dets) {
  json arr = json::array();
  for (const auto& d : dets) {
    arr.push_back({{"box", box_json(d.box)}, {"label", d.label}, {"score", d.score}});
  }
  return arr;
}

std::vector<Detection> detections_from(const json& arr) {
  std::vector<Detection> out;
  for (const auto& j : arr) {
    out.push_back({box_from(j.at("box")), j.at("label").get<std::string>(),
                   j.at("score").get<double>()});
  }
  return out;
}

std::string safe_name(const std::string& id) {
  std::string out;
  for (char ch : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ||
                    ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  return out.empty() ? "_" : out;
}

// Metadata document without the digest, plus the relative file of every
// patch and probe image in order.
struct Layout {
  json doc;
  std::vector<std::string> patch_files;
  std::vector<std::string> probe_files;
};

Layout describe(const PatchIndex& index) {
  Layout lay;
  json& doc = lay.doc;
  doc["schema_version"] = kIndexSchemaVersion;
  doc["created_at"] = index.created_at;
  doc["config_digest"] = index.config_digest;
  doc["oracle_id"] = index.oracle_id;
  doc["transforms_tested"] = index.transforms_tested;
  doc["harvest_queries"] = index.harvest_queries;

  std::map<std::string, int> per_source;
  json records = json::array();
  for (const auto& r : index.records) {
    const int k = per_source[r.source_image_id]++;
    std::string file =
        "patches/" + safe_name(r.source_image_id) + "_" + std::to_string(k) + ".png";
    records.push_back({{"file", file},
                       {"label", r.label},
                       {"score", r.score},
                       {"source_image_id", r.source_image_id},
                       {"source_box", box_json(r.source_box)},
                       {"stats", {{"mean", r.stats.mean}, {"std", r.stats.stddev}}},
                       {"augmentation", r.augmentation},
                       {"robustness", r.robustness}});
    lay.patch_files.push_back(std::move(file));
  }
  doc["records"] = std::move(records);

  json probes = json::array();
  for (std::size_t i = 0; i < index.fingerprints.size(); ++i) {
    const auto& fp = index.fingerprints[i];
    std::string file = "probes/" + std::to_string(i) + "_" + safe_name(fp.probe_id) + ".png";
    probes.push_back({{"probe_id", fp.probe_id},
                      {"file", file},
                      {"detections", detections_json(fp.detections)},
                      {"digest", fp.digest}});
    lay.probe_files.push_back(std::move(file));
  }
  doc["fingerprints"] = std::move(probes);
  return lay;
}

std::string content_digest(const json& doc, const PatchIndex& index) {
  Sha256 h;
  h.update(doc.dump());
  for (const auto& r : index.records) h.update(r.patch.data());
  for (const auto& fp : index.fingerprints) h.update(fp.image.data());
  return h.hex_digest();
}

}  // namespace

std::string fingerprint_digest(const std::vector<Detection>& detections) {
  return sha256_hex(detections_json(detections).dump());
}

void save_index(const PatchIndex& index, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "patches", ec);
  if (!ec) fs::create_directories(dir / "probes", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  Layout lay = describe(index);
  for (std::size_t i = 0; i < index.records.size(); ++i) {
    save_image(index.records[i].patch, dir / lay.patch_files[i]);
  }
  for (std::size_t i = 0; i < index.fingerprints.size(); ++i) {
    save_image(index.fingerprints[i].image, dir / lay.probe_files[i]);
  }
  lay.doc["content_digest"] = content_digest(lay.doc, index);

  std::ofstream out(dir / "index.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "index.json").string());
  out << lay.doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + (dir / "index.json").string());
}

PatchIndex load_index(const fs::path& dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw IoError("cannot open " + (dir / "index.json").string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw DigestMismatch("index.json is not valid JSON");
  }

  const auto version = doc.value("schema_version", -1);
  if (version != kIndexSchemaVersion) {
    throw VersionMismatch("index schema version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kIndexSchemaVersion) + ")");
  }
  if (!doc.contains("content_digest") || !doc["content_digest"].is_string()) {
    throw DigestMismatch("index.json has no content digest");
  }
  const std::string stored = doc["content_digest"].get<std::string>();

  PatchIndex index;
  try {
    index.created_at = doc.at("created_at").get<std::string>();
    index.config_digest = doc.at("config_digest").get<std::string>();
    index.oracle_id = doc.at("oracle_id").get<std::string>();
    index.transforms_tested = doc.at("transforms_tested").get<int>();
    index.harvest_queries = doc.at("harvest_queries").get<std::uint64_t>();
    for (const auto& j : doc.at("records")) {
      PatchRecord r;
      r.patch = load_image(dir / j.at("file").get<std::string>());
      r.label = j.at("label").get<std::string>();
      r.score = j.at("score").get<double>();
      r.source_image_id = j.at("source_image_id").get<std::string>();
      r.source_box = box_from(j.at("source_box"));
      r.stats.mean = j.at("stats").at("mean").get<std::array<double, 3>>();
      r.stats.stddev = j.at("stats").at("std").get<std::array<double, 3>>();
      r.augmentation = j.at("augmentation").get<std::string>();
      r.robustness = j.at("robustness").get<int>();
      index.records.push_back(std::move(r));
    }
    for (const auto& j : doc.at("fingerprints")) {
      ProbeFingerprint fp;
      fp.probe_id = j.at("probe_id").get<std::string>();
      fp.image = load_image(dir / j.at("file").get<std::string>());
      fp.detections = detections_from(j.at("detections"));
      fp.digest = j.at("digest").get<std::string>();
      index.fingerprints.push_back(std::move(fp));
    }
  } catch (const json::exception& e) {
    throw DigestMismatch(std::string("index.json is malformed: ") + e.what());
  } catch (const DecodeError& e) {
    throw DigestMismatch(std::string("patch image is corrupt: ") + e.what());
  }

  // Recompute from the parsed content; any edit to metadata or pixels shows.
  const Layout lay = describe(index);
  if (content_digest(lay.doc, index) != stored) {
    throw DigestMismatch("index content digest mismatch in " + dir.string());
  }
  return index;
}

}  // namespace ghostpatch

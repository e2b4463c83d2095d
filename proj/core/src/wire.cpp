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

#include "ghostpatch/wire.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "ghostpatch/codec.hpp"
#include "ghostpatch/digest.hpp"
#include "ghostpatch/errors.hpp"
#include "json.hpp"

namespace ghostpatch {
namespace {

using nlohmann::json;

json parse_object(std::string_view body, const char* what) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ProtocolError(std::string(what) + ": body is not a JSON object");
  }
  return doc;
}

const json& require(const json& obj, const char* key, const char* what) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ProtocolError(std::string(what) + ": missing field '" + key + "'");
  }
  return *it;
}

void only_fields(const json& obj, std::initializer_list<const char*> allowed,
                 const char* what) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw ProtocolError(std::string(what) + ": unexpected field '" + key + "'");
    }
  }
}

}  // namespace

std::string encode_detect_request(const ImageTensor& image,
                                  std::optional<double> min_score) {
  json doc;
  doc["image_png_b64"] = base64_encode(encode_png(image));
  if (min_score) doc["min_score"] = *min_score;
  return doc.dump();
}

DetectRequest decode_detect_request(std::string_view body) {
  const json doc = parse_object(body, "detect request");
  const json& b64 = require(doc, "image_png_b64", "detect request");
  if (!b64.is_string()) throw ProtocolError("image_png_b64 must be a string");

  DetectRequest req;
  if (auto it = doc.find("min_score"); it != doc.end() && !it->is_null()) {
    if (!it->is_number()) throw ProtocolError("min_score must be a number");
    req.min_score = it->get<double>();
  }
  const auto bytes = base64_decode(b64.get_ref<const std::string&>());
  req.image = decode_image(bytes);
  return req;
}

std::string encode_detect_response(const DetectResponse& response) {
  json dets = json::array();
  for (const auto& d : response.detections) {
    dets.push_back({{"box", {d.box.x0, d.box.y0, d.box.x1, d.box.y1}},
                    {"label", d.label},
                    {"score", d.score}});
  }
  json doc;
  doc["model_id"] = response.model_id;
  doc["detections"] = std::move(dets);
  doc["elapsed_ms"] = response.elapsed_ms;
  return doc.dump();
}

DetectResponse decode_detect_response(std::string_view body, int image_width,
                                      int image_height) {
  constexpr const char* kWhat = "detect response";
  const json doc = parse_object(body, kWhat);

  DetectResponse out;
  const json& model_id = require(doc, "model_id", kWhat);
  if (!model_id.is_string() || model_id.get_ref<const std::string&>().empty()) {
    throw ProtocolError("model_id must be a non-empty string");
  }
  out.model_id = model_id.get<std::string>();
  only_fields(doc, {"model_id", "detections", "elapsed_ms"}, kWhat);

  const json& elapsed = require(doc, "elapsed_ms", kWhat);
  if (!elapsed.is_number() || elapsed.get<double>() < 0.0) {
    throw ProtocolError("elapsed_ms must be a non-negative number");
  }
  out.elapsed_ms = elapsed.get<double>();

  const json& dets = require(doc, "detections", kWhat);
  if (!dets.is_array()) throw ProtocolError("detections must be an array");
  for (const json& item : dets) {
    if (!item.is_object()) throw ProtocolError("detection must be an object");
    const json& box = require(item, "box", "detection");
    const json& label = require(item, "label", "detection");
    const json& score = require(item, "score", "detection");
    only_fields(item, {"box", "label", "score"}, "detection");
    if (!box.is_array() || box.size() != 4 ||
        !std::all_of(box.begin(), box.end(), [](const json& v) {
          return v.is_number() && v.get<double>() >= 0.0;
        })) {
      throw ProtocolError("box must be an array of 4 non-negative numbers");
    }
    if (!label.is_string()) throw ProtocolError("label must be a string");
    if (!score.is_number()) throw ProtocolError("score must be a number");
    const double s = score.get<double>();
    if (!(s >= 0.0 && s <= 1.0)) throw ProtocolError("score outside [0, 1]");

    const double bx0 = box[0].get<double>();
    const double by0 = box[1].get<double>();
    const double bx1 = box[2].get<double>();
    const double by1 = box[3].get<double>();
    if (!(bx0 < bx1 && by0 < by1)) throw ProtocolError("degenerate box");

    Detection d;
    d.box.x0 = std::clamp(static_cast<int>(std::floor(bx0)), 0, image_width);
    d.box.y0 = std::clamp(static_cast<int>(std::floor(by0)), 0, image_height);
    d.box.x1 = std::clamp(static_cast<int>(std::ceil(bx1)), 0, image_width);
    d.box.y1 = std::clamp(static_cast<int>(std::ceil(by1)), 0, image_height);
    if (d.box.empty()) throw ProtocolError("box lies outside the image");
    d.label = label.get<std::string>();
    d.score = s;
    out.detections.push_back(std::move(d));
  }
  return out;
}

std::string encode_info(const ServiceInfo& info) {
  json doc;
  doc["model_id"] = info.model_id;
  doc["input_size"] = {info.input_height, info.input_width};
  return doc.dump();
}

ServiceInfo decode_info(std::string_view body) {
  const json doc = parse_object(body, "info");
  ServiceInfo info;
  const json& id = require(doc, "model_id", "info");
  const json& size = require(doc, "input_size", "info");
  if (!id.is_string()) throw ProtocolError("model_id must be a string");
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    throw ProtocolError("input_size must be [h, w]");
  }
  info.model_id = id.get<std::string>();
  info.input_height = size[0].get<int>();
  info.input_width = size[1].get<int>();
  return info;
}

}  // namespace ghostpatch

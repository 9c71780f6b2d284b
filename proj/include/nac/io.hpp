// Copyright 2026 The nac Authors. All Rights Reserved.
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

#pragma once

// JSON file formats:
//   nac-keypoints/1  per-image normalized proposal locations and visibility
//   nac-model/1      per-view selected parts and their shifts
//   nac-boxes/1      per-image pixel boxes
//   nac-report/1     fit summary with per-image view and root
//
// Writers emit a canonical layout (fixed key order, shortest round-trip
// floats), so parse followed by serialize reproduces the input bytes.
// Readers report violations as "line N: /json/pointer: message".

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nac/core.hpp"
#include "nac/estimation.hpp"
#include "nac/selection.hpp"

namespace nac::io {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline constexpr std::string_view kKeypointsFormat = "nac-keypoints/1";
inline constexpr std::string_view kModelFormat = "nac-model/1";
inline constexpr std::string_view kBoxesFormat = "nac-boxes/1";
inline constexpr std::string_view kReportFormat = "nac-report/1";
inline constexpr std::string_view kInferenceFormat = "nac-inference/1";
inline constexpr std::string_view kPartsFormat = "nac-parts/1";

// ---------------------------------------------------------------------------
// Parsing with source positions

/// A parsed document plus the source line of every value, keyed by JSON
/// pointer.
class LocatedJson {
 public:
  Json value;

  std::size_t line_of(std::string path) const {
    while (true) {
      if (auto it = lines_.find(path); it != lines_.end()) return it->second;
      if (path.empty()) return 1;
      path.erase(path.rfind('/'));
    }
  }

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ValidationError("line " + std::to_string(line_of(path)) + ": " +
                          (path.empty() ? "/" : path) + ": " + message);
  }

  static LocatedJson parse(std::string_view text);

 private:
  friend class SaxBuilder;
  std::map<std::string, std::size_t> lines_;
};

namespace detail {

/// Forward iterator over chars that publishes how far the lexer has read.
class CountingIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator() = default;
  CountingIterator(const char* at, std::size_t* consumed) : at_(at), consumed_(consumed) {}

  reference operator*() const { return *at_; }
  CountingIterator& operator++() {
    ++at_;
    if (consumed_ != nullptr) ++*consumed_;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  friend bool operator==(const CountingIterator& a, const CountingIterator& b) {
    return a.at_ == b.at_;
  }

 private:
  const char* at_ = nullptr;
  std::size_t* consumed_ = nullptr;
};

inline std::string escape_pointer_token(const std::string& token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace detail

/// SAX consumer that builds the DOM and records a line per JSON pointer.
class SaxBuilder : public nlohmann::json_sax<Json> {
 public:
  SaxBuilder(std::string_view text, const std::size_t* consumed, LocatedJson& out)
      : text_(text), consumed_(consumed), out_(out) {
    line_starts_.push_back(0);
    for (std::size_t k = 0; k < text.size(); ++k) {
      if (text[k] == '\n') line_starts_.push_back(k + 1);
    }
  }

  bool null() override { return scalar(nullptr); }
  bool boolean(bool v) override { return scalar(v); }
  bool number_integer(number_integer_t v) override { return scalar(v); }
  bool number_unsigned(number_unsigned_t v) override { return scalar(v); }
  bool number_float(number_float_t v, const string_t&) override { return scalar(v); }
  bool string(string_t& v) override { return scalar(v); }
  bool binary(binary_t& v) override { return scalar(Json::binary(v)); }

  bool start_object(std::size_t) override { return open(Json::object()); }
  bool start_array(std::size_t) override { return open(Json::array()); }
  bool end_object() override { return close(); }
  bool end_array() override { return close(); }

  bool key(string_t& k) override {
    frames_.back().key = k;
    return true;
  }

  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    std::string what = ex.what();
    if (auto colon = what.find("syntax error"); colon != std::string::npos) {
      what = what.substr(colon);
    }
    throw ValidationError("line " + std::to_string(line_at(position == 0 ? 0 : position - 1)) +
                          ": malformed JSON: " + what);
  }

 private:
  struct Frame {
    Json* node;
    std::string path;
    std::string key;
  };

  std::size_t line_at(std::size_t offset) const {
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
    return static_cast<std::size_t>(it - line_starts_.begin());
  }

  // Numbers are terminated by one lookahead character; step back over any
  // whitespace so the reported line is that of the token itself.
  std::size_t token_line() const {
    std::size_t end = std::min(*consumed_, text_.size());
    while (end > 0 && std::isspace(static_cast<unsigned char>(text_[end - 1]))) --end;
    return line_at(end == 0 ? 0 : end - 1);
  }

  Json* place(Json value, std::string& path) {
    if (frames_.empty()) {
      out_.value = std::move(value);
      path.clear();
      return &out_.value;
    }
    Frame& parent = frames_.back();
    if (parent.node->is_object()) {
      path = parent.path + "/" + detail::escape_pointer_token(parent.key);
      auto& slot = (*parent.node)[parent.key];
      slot = std::move(value);
      return &slot;
    }
    path = parent.path + "/" + std::to_string(parent.node->size());
    parent.node->push_back(std::move(value));
    return &parent.node->back();
  }

  bool scalar(Json value) {
    std::string path;
    place(std::move(value), path);
    out_.lines_[path] = token_line();
    return true;
  }

  bool open(Json container) {
    std::string path;
    Json* node = place(std::move(container), path);
    out_.lines_[path] = token_line();
    frames_.push_back({node, path, {}});
    return true;
  }

  bool close() {
    frames_.pop_back();
    return true;
  }

  std::string_view text_;
  const std::size_t* consumed_;
  LocatedJson& out_;
  std::vector<std::size_t> line_starts_;
  std::vector<Frame> frames_;
};

inline LocatedJson LocatedJson::parse(std::string_view text) {
  LocatedJson out;
  std::size_t consumed = 0;
  SaxBuilder builder(text, &consumed, out);
  detail::CountingIterator first(text.data(), &consumed);
  detail::CountingIterator last(text.data() + text.size(), nullptr);
  Json::sax_parse(first, last, &builder);
  return out;
}

// ---------------------------------------------------------------------------
// Canonical writer

namespace detail {

inline void write_canonical(const OrderedJson& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + OrderedJson(it.key()).dump() + ": ";
      write_canonical(it.value(), out, indent + 2);
    }
    out += "\n" + close_pad + "}";
  } else if (j.is_array()) {
    const bool flat = std::none_of(j.begin(), j.end(),
                                   [](const OrderedJson& e) { return e.is_structured(); });
    if (flat) {
      out += "[";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k > 0) out += ", ";
        out += j[k].dump();
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (k > 0) out += ",\n";
      out += pad;
      write_canonical(j[k], out, indent + 2);
    }
    out += "\n" + close_pad + "]";
  } else {
    out += j.dump();
  }
}

}  // namespace detail

inline std::string to_text(const OrderedJson& j) {
  std::string out;
  detail::write_canonical(j, out, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Field access helpers

namespace detail {

class Reader {
 public:
  explicit Reader(const LocatedJson& doc) : doc_(doc) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    doc_.fail(path, msg);
  }

  const Json& at(const std::string& path) const {
    return doc_.value.at(Json::json_pointer(path));
  }

  const Json& field(const std::string& path, const std::string& key,
                    const std::string& context = {}) const {
    const Json& obj = at(path);
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, context + "missing field \"" + key + "\"");
    return *it;
  }

  void expect_format(std::string_view format) const {
    if (!doc_.value.is_object()) fail("", "expected a JSON object");
    const Json& f = field("", "format");
    if (!f.is_string() || f.get<std::string>() != format) {
      fail("/format", "expected \"" + std::string(format) + "\"");
    }
  }

  std::int64_t integer(const std::string& path, std::int64_t lo, std::int64_t hi) const {
    const Json& v = at(path);
    if (!v.is_number_integer()) fail(path, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) {
      fail(path, "value out of range");
    }
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi) {
      fail(path, "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
    }
    return x;
  }

  double number(const std::string& path) const {
    const Json& v = at(path);
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
  }

  const Json& array(const std::string& path, const std::string& context = {}) const {
    const Json& v = at(path);
    if (!v.is_array()) fail(path, context + "expected an array");
    return v;
  }

  const Json& sized_array(const std::string& path, std::size_t size,
                          const std::string& context = {}) const {
    const Json& v = array(path, context);
    if (v.size() != size) {
      fail(path, context + "has " + std::to_string(v.size()) + " entries, expected " +
                     std::to_string(size));
    }
    return v;
  }

  Vec2 point(const std::string& path) const {
    sized_array(path, 2);
    return {number(path + "/0"), number(path + "/1")};
  }

  std::string string(const std::string& path) const {
    const Json& v = at(path);
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  const LocatedJson& doc_;
};

inline std::string child(const std::string& path, const std::string& key) {
  return path + "/" + key;
}
inline std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

inline OrderedJson point_json(Vec2 v) { return OrderedJson::array({v.x, v.y}); }

inline constexpr std::int64_t kMaxCount = std::int64_t{1} << 40;

}  // namespace detail

// ---------------------------------------------------------------------------
// nac-keypoints/1

struct KeypointFile {
  std::size_t num_proposals = 0;
  Dataset images;

  friend bool operator==(const KeypointFile&, const KeypointFile&) = default;
};

inline KeypointFile parse_keypoints(std::string_view text) {
  const LocatedJson doc = LocatedJson::parse(text);
  const detail::Reader r(doc);
  r.expect_format(kKeypointsFormat);
  r.field("", "num_proposals");
  r.field("", "images");
  KeypointFile out;
  out.num_proposals = static_cast<std::size_t>(r.integer("/num_proposals", 1, detail::kMaxCount));
  const Json& images = r.array("/images");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string path = detail::child("/images", i);
    r.field(path, "id");
    const std::string id = r.string(path + "/id");
    const std::string ctx = "image '" + id + "': ";
    if (id.empty()) r.fail(path + "/id", "image id must not be empty");
    if (!seen.insert(id).second) r.fail(path + "/id", "duplicate image id '" + id + "'");
    for (const char* key : {"width", "height", "points", "visible"}) r.field(path, key, ctx);

    ProposalSet image;
    image.meta.image_id = id;
    image.meta.width = r.integer(path + "/width", 1, detail::kMaxCount);
    image.meta.height = r.integer(path + "/height", 1, detail::kMaxCount);
    const Json& points = r.sized_array(path + "/points", out.num_proposals, ctx + "points ");
    const Json& visible = r.sized_array(path + "/visible", out.num_proposals, ctx + "visible ");
    image.locations.resize(points.size());
    image.visible.resize(visible.size());
    for (std::size_t p = 0; p < out.num_proposals; ++p) {
      const std::string vpath = detail::child(path + "/visible", p);
      if (!visible[p].is_boolean()) r.fail(vpath, ctx + "expected a boolean");
      image.visible[p] = visible[p].get<bool>() ? 1 : 0;
      const std::string ppath = detail::child(path + "/points", p);
      image.locations[p] = r.point(ppath);
      const Vec2 q = image.locations[p];
      if (image.visible[p] && !(q.x >= 0.0 && q.x <= 1.0 && q.y >= 0.0 && q.y <= 1.0)) {
        r.fail(ppath, ctx + "visible point outside [0,1]^2");
      }
    }
    out.images.push_back(std::move(image));
  }
  return out;
}

inline std::string serialize(const KeypointFile& file) {
  OrderedJson doc;
  doc["format"] = kKeypointsFormat;
  doc["num_proposals"] = file.num_proposals;
  OrderedJson images = OrderedJson::array();
  for (const auto& image : file.images) {
    if (image.num_parts() != file.num_proposals || image.visible.size() != file.num_proposals) {
      throw StructuralError("image '" + image.meta.image_id + "' does not have " +
                            std::to_string(file.num_proposals) + " proposals");
    }
    OrderedJson rec;
    rec["id"] = image.meta.image_id;
    rec["width"] = image.meta.width;
    rec["height"] = image.meta.height;
    OrderedJson points = OrderedJson::array();
    OrderedJson visible = OrderedJson::array();
    for (std::size_t p = 0; p < image.num_parts(); ++p) {
      points.push_back(detail::point_json(image.locations[p]));
      visible.push_back(image.visible[p] != 0);
    }
    rec["points"] = std::move(points);
    rec["visible"] = std::move(visible);
    images.push_back(std::move(rec));
  }
  doc["images"] = std::move(images);
  return to_text(doc);
}

inline KeypointFile make_keypoint_file(Dataset data) {
  KeypointFile file;
  file.num_proposals = common_part_count(data);
  file.images = std::move(data);
  return file;
}

// ---------------------------------------------------------------------------
// nac-model/1

/// Reads a model; shifts of unselected parts are zero.
inline ConstellationModel parse_model(std::string_view text) {
  const LocatedJson doc = LocatedJson::parse(text);
  const detail::Reader r(doc);
  r.expect_format(kModelFormat);
  for (const char* key : {"P", "V", "M", "views"}) r.field("", key);
  const auto parts = static_cast<std::size_t>(r.integer("/P", 1, detail::kMaxCount));
  const auto views = static_cast<std::size_t>(r.integer("/V", 1, detail::kMaxCount));
  const auto per_view =
      static_cast<std::size_t>(r.integer("/M", 1, static_cast<std::int64_t>(parts)));
  ConstellationModel model = ConstellationModel::empty(parts, views, per_view);
  r.sized_array("/views", views);
  for (std::size_t v = 0; v < views; ++v) {
    const std::string path = detail::child("/views", v);
    r.field(path, "parts");
    r.field(path, "shifts");
    const Json& ids = r.sized_array(path + "/parts", per_view);
    r.sized_array(path + "/shifts", per_view);
    std::int64_t previous = -1;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::string ppath = detail::child(path + "/parts", k);
      const std::int64_t p = r.integer(ppath, 0, static_cast<std::int64_t>(parts) - 1);
      if (p <= previous) r.fail(ppath, "part indices must be strictly ascending");
      previous = p;
      const std::string spath = detail::child(path + "/shifts", k);
      const Vec2 d = r.point(spath);
      if (!(d.x >= -1.0 && d.x <= 1.0 && d.y >= -1.0 && d.y <= 1.0)) {
        r.fail(spath, "shift outside [-1,1]^2");
      }
      model.selected[model.index(v, static_cast<std::size_t>(p))] = 1;
      model.shifts[model.index(v, static_cast<std::size_t>(p))] = d;
    }
  }
  return model;
}

inline std::string serialize(const ConstellationModel& model) {
  model.check();
  OrderedJson doc;
  doc["format"] = kModelFormat;
  doc["P"] = model.num_parts;
  doc["V"] = model.num_views;
  doc["M"] = model.parts_per_view;
  OrderedJson views = OrderedJson::array();
  for (std::size_t v = 0; v < model.num_views; ++v) {
    OrderedJson parts = OrderedJson::array();
    OrderedJson shifts = OrderedJson::array();
    for (std::size_t p : model.parts_of(v)) {
      parts.push_back(p);
      shifts.push_back(detail::point_json(model.shift(v, p)));
    }
    OrderedJson rec;
    rec["parts"] = std::move(parts);
    rec["shifts"] = std::move(shifts);
    views.push_back(std::move(rec));
  }
  doc["views"] = std::move(views);
  return to_text(doc);
}

/// Equality as seen through the model file: sizes, selections and the
/// shifts of selected parts.
inline bool same_model(const ConstellationModel& a, const ConstellationModel& b) {
  if (a.num_parts != b.num_parts || a.num_views != b.num_views ||
      a.parts_per_view != b.parts_per_view || a.selected != b.selected) {
    return false;
  }
  for (std::size_t c = 0; c < a.selected.size(); ++c) {
    if (a.selected[c] && !(a.shifts[c] == b.shifts[c])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// nac-boxes/1

struct BoxFile {
  std::vector<BoxSet> images;

  friend bool operator==(const BoxFile&, const BoxFile&) = default;
};

inline BoxFile parse_boxes(std::string_view text) {
  const LocatedJson doc = LocatedJson::parse(text);
  const detail::Reader r(doc);
  r.expect_format(kBoxesFormat);
  r.field("", "images");
  const Json& images = r.array("/images");
  BoxFile out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string path = detail::child("/images", i);
    r.field(path, "id");
    BoxSet set;
    set.image_id = r.string(path + "/id");
    if (!seen.insert(set.image_id).second) {
      r.fail(path + "/id", "duplicate image id '" + set.image_id + "'");
    }
    r.field(path, "boxes", "image '" + set.image_id + "': ");
    const Json& boxes = r.array(path + "/boxes");
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const std::string bpath = detail::child(path + "/boxes", k);
      r.sized_array(bpath, 4);
      Box b{r.number(bpath + "/0"), r.number(bpath + "/1"), r.number(bpath + "/2"),
            r.number(bpath + "/3")};
      if (!(b.x0 < b.x1 && b.y0 < b.y1)) r.fail(bpath, "box needs x0 < x1 and y0 < y1");
      set.boxes.push_back(b);
    }
    out.images.push_back(std::move(set));
  }
  return out;
}

inline std::string serialize(const BoxFile& file) {
  OrderedJson doc;
  doc["format"] = kBoxesFormat;
  OrderedJson images = OrderedJson::array();
  for (const auto& set : file.images) {
    OrderedJson rec;
    rec["id"] = set.image_id;
    OrderedJson boxes = OrderedJson::array();
    for (const Box& b : set.boxes) boxes.push_back(OrderedJson::array({b.x0, b.y0, b.x1, b.y1}));
    rec["boxes"] = std::move(boxes);
    images.push_back(std::move(rec));
  }
  doc["images"] = std::move(images);
  return to_text(doc);
}

// ---------------------------------------------------------------------------
// nac-report/1

struct ReportFile {
  std::size_t views = 0;
  std::size_t parts_per_view = 0;
  double objective = 0.0;
  std::size_t best_restart = 0;
  std::vector<std::size_t> iterations_per_restart;
  std::vector<double> restart_objectives;
  std::size_t updates_checked = 0;
  std::size_t descent_violations = 0;
  std::vector<std::string> image_ids;
  LatentState latent;

  friend bool operator==(const ReportFile&, const ReportFile&) = default;
};

inline ReportFile make_report(const FitReport& fit, std::span<const ProposalSet> data) {
  ReportFile out;
  out.views = fit.model.num_views;
  out.parts_per_view = fit.model.parts_per_view;
  out.objective = fit.objective;
  out.best_restart = fit.best_restart;
  out.iterations_per_restart = fit.iterations_per_restart;
  out.restart_objectives = fit.restart_objectives;
  out.updates_checked = fit.updates_checked;
  out.descent_violations = fit.descent_violations.size();
  for (const auto& image : data) out.image_ids.push_back(image.meta.image_id);
  out.latent = fit.latent;
  return out;
}

inline ReportFile parse_report(std::string_view text) {
  const LocatedJson doc = LocatedJson::parse(text);
  const detail::Reader r(doc);
  r.expect_format(kReportFormat);
  for (const char* key : {"views", "parts_per_view", "objective", "best_restart",
                          "iterations_per_restart", "restart_objectives", "updates_checked",
                          "descent_violations", "images"}) {
    r.field("", key);
  }
  ReportFile out;
  out.views = static_cast<std::size_t>(r.integer("/views", 1, detail::kMaxCount));
  out.parts_per_view = static_cast<std::size_t>(r.integer("/parts_per_view", 1, detail::kMaxCount));
  out.objective = r.number("/objective");
  out.best_restart = static_cast<std::size_t>(r.integer("/best_restart", 0, detail::kMaxCount));
  const Json& iters = r.array("/iterations_per_restart");
  for (std::size_t k = 0; k < iters.size(); ++k) {
    out.iterations_per_restart.push_back(static_cast<std::size_t>(
        r.integer(detail::child("/iterations_per_restart", k), 0, detail::kMaxCount)));
  }
  const Json& objs = r.array("/restart_objectives");
  for (std::size_t k = 0; k < objs.size(); ++k) {
    out.restart_objectives.push_back(r.number(detail::child("/restart_objectives", k)));
  }
  out.updates_checked = static_cast<std::size_t>(r.integer("/updates_checked", 0, detail::kMaxCount));
  out.descent_violations =
      static_cast<std::size_t>(r.integer("/descent_violations", 0, detail::kMaxCount));
  const Json& images = r.array("/images");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string path = detail::child("/images", i);
    for (const char* key : {"id", "view", "root"}) r.field(path, key);
    out.image_ids.push_back(r.string(path + "/id"));
    out.latent.view_of.push_back(static_cast<std::size_t>(
        r.integer(path + "/view", 0, static_cast<std::int64_t>(out.views) - 1)));
    out.latent.roots.push_back(r.point(path + "/root"));
  }
  return out;
}

inline std::string serialize(const ReportFile& report) {
  OrderedJson doc;
  doc["format"] = kReportFormat;
  doc["views"] = report.views;
  doc["parts_per_view"] = report.parts_per_view;
  doc["objective"] = report.objective;
  doc["best_restart"] = report.best_restart;
  doc["iterations_per_restart"] = report.iterations_per_restart;
  doc["restart_objectives"] = report.restart_objectives;
  doc["updates_checked"] = report.updates_checked;
  doc["descent_violations"] = report.descent_violations;
  OrderedJson images = OrderedJson::array();
  for (std::size_t i = 0; i < report.image_ids.size(); ++i) {
    OrderedJson rec;
    rec["id"] = report.image_ids[i];
    rec["view"] = report.latent.view_of[i];
    rec["root"] = detail::point_json(report.latent.roots[i]);
    images.push_back(std::move(rec));
  }
  doc["images"] = std::move(images);
  return to_text(doc);
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

/// Runs a parser over a file, prefixing diagnostics with the file name.
template <typename Parse>
auto load(const std::string& path, Parse&& parse) {
  const std::string text = read_text(path);
  try {
    return parse(text);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace nac::io

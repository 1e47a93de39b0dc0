// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/plan.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "splitlearn/error.hpp"

namespace splitlearn {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto at = s.find(sep, start);
    out.push_back(trim(s.substr(start, at - start)));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("plan line " + std::to_string(line) + ": " + what);
}

std::size_t parse_size(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) fail(line, "expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

Shape parse_shape(std::string_view s, std::size_t line) {
  Shape shape;
  for (auto part : split(s, 'x')) shape.push_back(parse_size(part, line));
  return shape;
}

Activation parse_activation(std::string_view s, std::size_t line) {
  if (s == "identity" || s == "linear") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "softmax") return Activation::softmax;
  fail(line, "unknown activation '" + std::string(s) + "'");
}

LayerSpec parse_layer(std::string_view s, std::size_t line) {
  std::istringstream in{std::string(s)};
  std::string kind;
  in >> kind;
  LayerSpec layer;
  if (kind == "dense") {
    layer.kind = LayerKind::dense;
  } else if (kind == "conv2d") {
    layer.kind = LayerKind::conv2d;
  } else if (kind == "maxpool") {
    layer.kind = LayerKind::maxpool;
  } else if (kind == "flatten") {
    layer.kind = LayerKind::flatten;
  } else {
    fail(line, "unknown layer kind '" + kind + "'");
  }

  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) fail(line, "expected key=value, got '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string_view value = std::string_view(token).substr(eq + 1);
    if (key == "units" && layer.kind == LayerKind::dense) {
      layer.units = parse_size(value, line);
    } else if (key == "filters" && layer.kind == LayerKind::conv2d) {
      layer.filters = parse_size(value, line);
    } else if (key == "kernel" && layer.kind == LayerKind::conv2d) {
      const Shape k = parse_shape(value, line);
      if (k.size() == 1) {
        layer.kernel_h = layer.kernel_w = k[0];
      } else if (k.size() == 2) {
        layer.kernel_h = k[0];
        layer.kernel_w = k[1];
      } else {
        fail(line, "kernel must be <k> or <kh>x<kw>");
      }
    } else if (key == "window" && layer.kind == LayerKind::maxpool) {
      layer.window = parse_size(value, line);
    } else if (key == "stride" && (layer.kind == LayerKind::conv2d || layer.kind == LayerKind::maxpool)) {
      layer.stride = parse_size(value, line);
    } else if (key == "padding" && layer.kind == LayerKind::conv2d) {
      if (value == "valid") {
        layer.padding = Padding::valid;
      } else if (value == "same") {
        layer.padding = Padding::same;
      } else {
        fail(line, "padding must be valid or same");
      }
    } else if (key == "activation" && (layer.kind == LayerKind::dense || layer.kind == LayerKind::conv2d)) {
      layer.activation = parse_activation(value, line);
    } else {
      fail(line, "attribute '" + key + "' does not apply to " + kind);
    }
  }
  if (layer.stride == 0) fail(line, "stride must be positive");
  return layer;
}

}  // namespace

std::string_view to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::no_split: return "none";
    case SplitMode::single_split: return "single";
    case SplitMode::double_split: return "double";
  }
  return "?";
}

SplitMode SplitPlan::mode() const {
  switch (cuts.size()) {
    case 0: return SplitMode::no_split;
    case 1: return SplitMode::single_split;
    default: return SplitMode::double_split;
  }
}

PlanLayout validate_plan(const SplitPlan& plan) {
  if (plan.layers.empty()) throw PlanError("plan has no layers");
  if (plan.input_shape.empty()) throw PlanError("plan has no input shape");
  for (auto d : plan.input_shape) {
    if (d == 0) throw PlanError("input dimensions must be positive");
  }
  if (plan.cuts.size() > 2) throw PlanError("at most two cuts are supported, got " + std::to_string(plan.cuts.size()));
  const std::size_t n = plan.layers.size();
  for (std::size_t i = 0; i < plan.cuts.size(); ++i) {
    const std::size_t k = plan.cuts[i];
    if (k == 0 || k >= n) {
      throw PlanError("cut " + std::to_string(k) + " must lie strictly between the first and last layer (1.." +
                      std::to_string(n - 1) + ")");
    }
    if (i > 0 && k <= plan.cuts[i - 1]) throw PlanError("cuts must be strictly increasing");
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (plan.layers[i].activation == Activation::softmax) {
      throw PlanError("softmax is only allowed on the final layer (found on layer " + std::to_string(i + 1) + ")");
    }
  }

  PlanLayout layout;
  layout.mode = plan.mode();
  Shape cur = plan.input_shape;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      cur = layer_output_shape(plan.layers[i], cur);
    } catch (const DimensionError& e) {
      throw PlanError("layer " + std::to_string(i + 1) + " (" + std::string(to_string(plan.layers[i].kind)) +
                           "): " + e.what());
    }
    layout.layer_shapes.push_back(cur);
  }
  layout.output_shape = cur;
  if (plan.loss == LossKind::cross_entropy &&
      (plan.layers.back().activation != Activation::softmax || layout.output_shape.size() != 1)) {
    throw PlanError("cross_entropy loss needs a final dense layer with softmax activation");
  }

  std::vector<std::size_t> bounds{0};
  bounds.insert(bounds.end(), plan.cuts.begin(), plan.cuts.end());
  bounds.push_back(n);
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    SegmentSpec seg;
    seg.first_layer = bounds[s];
    seg.input_shape = bounds[s] == 0 ? plan.input_shape : layout.layer_shapes[bounds[s] - 1];
    seg.layers.assign(plan.layers.begin() + static_cast<std::ptrdiff_t>(bounds[s]),
                      plan.layers.begin() + static_cast<std::ptrdiff_t>(bounds[s + 1]));
    layout.segments.push_back(std::move(seg));
  }
  for (auto k : plan.cuts) layout.boundary_shapes.push_back(layout.layer_shapes[k - 1]);

  switch (layout.mode) {
    case SplitMode::no_split: layout.roles = {SegmentRole::monolithic}; break;
    case SplitMode::single_split: layout.roles = {SegmentRole::A, SegmentRole::C}; break;
    case SplitMode::double_split: layout.roles = {SegmentRole::A, SegmentRole::B, SegmentRole::C}; break;
  }
  return layout;
}

SplitPlan without_cuts(SplitPlan plan) {
  plan.cuts.clear();
  return plan;
}

SplitPlan with_cuts(SplitPlan plan, std::vector<std::size_t> cuts) {
  plan.cuts = std::move(cuts);
  return plan;
}

SplitPlan parse_plan(std::string_view text) {
  SplitPlan plan;
  bool saw_input = false, saw_loss = false;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "name") {
      plan.name = std::string(value);
    } else if (key == "input") {
      plan.input_shape = parse_shape(value, line_no);
      saw_input = true;
    } else if (key == "loss") {
      if (value == "mse") {
        plan.loss = LossKind::mse;
      } else if (value == "cross_entropy") {
        plan.loss = LossKind::cross_entropy;
      } else {
        fail(line_no, "loss must be mse or cross_entropy");
      }
      saw_loss = true;
    } else if (key == "cuts") {
      plan.cuts.clear();
      if (value != "none" && !value.empty()) {
        for (auto part : split(value, ',')) plan.cuts.push_back(parse_size(part, line_no));
      }
    } else if (key == "layer") {
      plan.layers.push_back(parse_layer(value, line_no));
    } else {
      fail(line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  if (!saw_input) throw FormatError("plan is missing 'input'");
  if (!saw_loss) throw FormatError("plan is missing 'loss'");
  if (plan.layers.empty()) throw FormatError("plan has no layers");
  return plan;
}

SplitPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open plan file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

std::string format_plan(const SplitPlan& plan) {
  std::ostringstream os;
  if (!plan.name.empty()) os << "name = " << plan.name << '\n';
  os << "input = ";
  for (std::size_t i = 0; i < plan.input_shape.size(); ++i) os << (i ? "x" : "") << plan.input_shape[i];
  os << "\nloss = " << to_string(plan.loss) << "\ncuts = ";
  if (plan.cuts.empty()) os << "none";
  for (std::size_t i = 0; i < plan.cuts.size(); ++i) os << (i ? ", " : "") << plan.cuts[i];
  os << '\n';
  for (const auto& l : plan.layers) {
    os << "layer = " << to_string(l.kind);
    switch (l.kind) {
      case LayerKind::dense:
        os << " units=" << l.units << " activation=" << to_string(l.activation);
        break;
      case LayerKind::conv2d:
        os << " filters=" << l.filters << " kernel=" << l.kernel_h << 'x' << l.kernel_w << " stride=" << l.stride
           << " padding=" << to_string(l.padding) << " activation=" << to_string(l.activation);
        break;
      case LayerKind::maxpool:
        os << " window=" << l.window << " stride=" << l.stride;
        break;
      case LayerKind::flatten:
        break;
    }
    os << '\n';
  }
  return os.str();
}

std::uint64_t plan_hash(const SplitPlan& plan) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : format_plan(plan)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool operator==(const SplitPlan& a, const SplitPlan& b) {
  return a.name == b.name && a.input_shape == b.input_shape && a.loss == b.loss && a.layers == b.layers &&
         a.cuts == b.cuts;
}

}  // namespace splitlearn

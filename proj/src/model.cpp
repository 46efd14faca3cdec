#include "gbk/model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gbk/rng.hpp"
#include "json.hpp"

namespace gbk {

namespace {

Tensor glorot(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (double& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

Var activate(Tape& tape, Activation act, Var v) {
  return act == Activation::kRelu ? tape.relu(v) : v;
}

std::string activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw std::runtime_error("unknown activation '" + s + "'");
}

}  // namespace

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "dense" || s == "mlp") return LayerKind::kDense;
  if (s == "gcn") return LayerKind::kGcn;
  if (s == "sage") return LayerKind::kSage;
  if (s == "gbk") return LayerKind::kGbk;
  throw std::runtime_error("unknown layer kind '" + s + "'");
}

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kGcn: return "gcn";
    case LayerKind::kSage: return "sage";
    case LayerKind::kGbk: return "gbk";
  }
  return "?";
}

std::vector<LayerSpec> make_model_specs(LayerKind kind, int in_dim, int hidden,
                                        int num_classes, int num_layers,
                                        int gate_hidden) {
  if (num_layers < 1) throw std::invalid_argument("model needs at least one layer");
  std::vector<LayerSpec> specs;
  int cur = in_dim;
  for (int l = 0; l < num_layers; ++l) {
    const bool last = l == num_layers - 1;
    LayerSpec s;
    s.kind = kind;
    s.in_dim = cur;
    s.out_dim = last ? num_classes : hidden;
    s.activation = last ? Activation::kIdentity : Activation::kRelu;
    s.gate_hidden_dim = gate_hidden;
    specs.push_back(s);
    cur = s.out_dim;
  }
  return specs;
}

std::vector<ParamRef> param_refs(ModelParams& params) {
  std::vector<ParamRef> refs;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    LayerParams& p = params.layers[l];
    switch (params.specs[l].kind) {
      case LayerKind::kDense:
      case LayerKind::kGcn:
        refs.push_back({prefix + "W", &p.W, true});
        break;
      case LayerKind::kSage:
        refs.push_back({prefix + "W_f", &p.W_f, true});
        refs.push_back({prefix + "W_s", &p.W_s, true});
        break;
      case LayerKind::kGbk:
        refs.push_back({prefix + "W_f", &p.W_f, true});
        refs.push_back({prefix + "W_s", &p.W_s, true});
        refs.push_back({prefix + "W_d", &p.W_d, true});
        refs.push_back({prefix + "W_g1", &p.W_g1, true});
        refs.push_back({prefix + "b_g1", &p.b_g1, false});
        refs.push_back({prefix + "W_g2", &p.W_g2, true});
        refs.push_back({prefix + "b_g2", &p.b_g2, false});
        break;
    }
    refs.push_back({prefix + "bias", &p.bias, false});
  }
  return refs;
}

ModelParams init_params(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  ModelParams params;
  params.specs = specs;
  params.seed = seed;
  params.layers.resize(specs.size());
  Rng rng(seed);
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const LayerSpec& s = specs[l];
    LayerParams& p = params.layers[l];
    switch (s.kind) {
      case LayerKind::kDense:
      case LayerKind::kGcn:
        p.W = glorot(s.in_dim, s.out_dim, rng);
        break;
      case LayerKind::kSage:
        p.W_f = glorot(s.in_dim, s.out_dim, rng);
        p.W_s = glorot(s.in_dim, s.out_dim, rng);
        break;
      case LayerKind::kGbk:
        p.W_f = glorot(s.in_dim, s.out_dim, rng);
        p.W_s = glorot(s.in_dim, s.out_dim, rng);
        p.W_d = glorot(s.in_dim, s.out_dim, rng);
        p.W_g1 = glorot(2 * s.in_dim, s.gate_hidden_dim, rng);
        p.b_g1 = Tensor(1, s.gate_hidden_dim);
        p.W_g2 = glorot(s.gate_hidden_dim, 1, rng);
        p.b_g2 = Tensor(1, 1);
        break;
    }
    p.bias = Tensor(1, s.out_dim);
  }
  return params;
}

BoundModel bind_params(Tape& tape, const ModelParams& params) {
  BoundModel bound;
  auto track = [&bound, &tape](Var* slot, const Tensor& t) {
    *slot = tape.input(t);
    bound.flat.push_back(*slot);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerParams& p = params.layers[l];
    BoundLayer b;
    switch (params.specs[l].kind) {
      case LayerKind::kDense:
      case LayerKind::kGcn:
        track(&b.W, p.W);
        break;
      case LayerKind::kSage:
        track(&b.W_f, p.W_f);
        track(&b.W_s, p.W_s);
        break;
      case LayerKind::kGbk:
        track(&b.W_f, p.W_f);
        track(&b.W_s, p.W_s);
        track(&b.W_d, p.W_d);
        track(&b.W_g1, p.W_g1);
        track(&b.b_g1, p.b_g1);
        track(&b.W_g2, p.W_g2);
        track(&b.b_g2, p.b_g2);
        break;
    }
    track(&b.bias, p.bias);
    bound.layers.push_back(b);
  }
  return bound;
}

Var gate_scores(Tape& tape, const BoundLayer& layer, Var z, const Graph& g) {
  const int h = tape.value(z).cols;
  std::vector<int> top(static_cast<std::size_t>(h));
  std::vector<int> bottom(static_cast<std::size_t>(h));
  std::iota(top.begin(), top.end(), 0);
  std::iota(bottom.begin(), bottom.end(), h);
  const Var u = tape.gather_rows(layer.W_g1, top);     // source half of W_g1
  const Var v = tape.gather_rows(layer.W_g1, bottom);  // destination half
  const Var p = tape.matmul(z, u);
  const Var q = tape.matmul(z, v);

  std::vector<int> srcs, dsts;
  srcs.reserve(g.edges.size());
  dsts.reserve(g.edges.size());
  for (auto [s, d] : g.edges) {
    srcs.push_back(s);
    dsts.push_back(d);
  }
  Var hidden = tape.add(tape.gather_rows(p, srcs), tape.gather_rows(q, dsts));
  hidden = tape.relu(tape.add_bias_row(hidden, layer.b_g1));
  const Var logit = tape.add_bias_row(tape.matmul(hidden, layer.W_g2), layer.b_g2);
  return tape.sigmoid(logit);
}

GbkLayerOut gbk_layer_forward(Tape& tape, const BoundLayer& layer,
                              const LayerSpec& spec, Var z, const Graph& g,
                              GateMode mode) {
  Var alpha;
  if (mode == GateMode::kOracle) {
    Tensor a(static_cast<int>(g.edges.size()), 1);
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      a.data[e] = g.labels[static_cast<std::size_t>(g.edges[e].first)] ==
                          g.labels[static_cast<std::size_t>(g.edges[e].second)]
                      ? 1.0
                      : 0.0;
    alpha = tape.input(std::move(a));
  } else {
    alpha = gate_scores(tape, layer, z, g);
  }
  const Var ones = tape.input(Tensor(static_cast<int>(g.edges.size()), 1, 1.0));
  const Var one_minus_alpha = tape.add(ones, tape.scale(alpha, -1.0));

  const Var agg_s = tape.neighbor_mean(tape.matmul(z, layer.W_s), g.neighbor_index, alpha);
  const Var agg_d =
      tape.neighbor_mean(tape.matmul(z, layer.W_d), g.neighbor_index, one_minus_alpha);
  const Var self = tape.matmul(z, layer.W_f);
  const Var pre = tape.add_bias_row(tape.add(self, tape.add(agg_s, agg_d)), layer.bias);
  return {activate(tape, spec.activation, pre), alpha};
}

Var gcn_layer_forward(Tape& tape, const BoundLayer& layer, const LayerSpec& spec,
                      Var z, const Graph& g) {
  const Var h = tape.matmul(z, layer.W);
  const Var agg =
      tape.neighbor_mean(h, g.neighbor_index, /*edge_weights=*/{}, /*include_self=*/true);
  return activate(tape, spec.activation, tape.add_bias_row(agg, layer.bias));
}

Var sage_layer_forward(Tape& tape, const BoundLayer& layer, const LayerSpec& spec,
                       Var z, const Graph& g) {
  const Var self = tape.matmul(z, layer.W_f);
  const Var agg = tape.neighbor_mean(tape.matmul(z, layer.W_s), g.neighbor_index);
  return activate(tape, spec.activation,
                  tape.add_bias_row(tape.add(self, agg), layer.bias));
}

Var dense_layer_forward(Tape& tape, const BoundLayer& layer, const LayerSpec& spec,
                        Var z) {
  return activate(tape, spec.activation,
                  tape.add_bias_row(tape.matmul(z, layer.W), layer.bias));
}

void validate_specs(const std::vector<LayerSpec>& specs, int feature_dim,
                    int num_classes) {
  if (specs.empty()) throw std::invalid_argument("model: empty layer spec list");
  if (specs.front().in_dim != feature_dim)
    throw std::invalid_argument("model: first layer in_dim " +
                                std::to_string(specs.front().in_dim) +
                                " != feature dim " + std::to_string(feature_dim));
  for (std::size_t l = 0; l + 1 < specs.size(); ++l)
    if (specs[l].out_dim != specs[l + 1].in_dim)
      throw std::invalid_argument("model: dimension chain breaks after layer " +
                                  std::to_string(l));
  if (specs.back().out_dim != num_classes)
    throw std::invalid_argument("model: final out_dim != num_classes");
  if (specs.back().activation != Activation::kIdentity)
    throw std::invalid_argument("model: final layer must emit raw logits");
  for (const LayerSpec& s : specs)
    if (s.in_dim <= 0 || s.out_dim <= 0 ||
        (s.kind == LayerKind::kGbk && s.gate_hidden_dim <= 0))
      throw std::invalid_argument("model: layer dims must be positive");
}

ForwardResult model_forward(Tape& tape, const BoundModel& bound,
                            const ModelParams& params, const Graph& g,
                            Var features, GateMode mode) {
  validate_specs(params.specs, tape.value(features).cols, g.num_classes);
  ForwardResult out;
  Var z = features;
  for (std::size_t l = 0; l < params.specs.size(); ++l) {
    if (l + 1 == params.specs.size()) out.final_hidden = z;
    const LayerSpec& spec = params.specs[l];
    const BoundLayer& layer = bound.layers[l];
    switch (spec.kind) {
      case LayerKind::kDense:
        z = dense_layer_forward(tape, layer, spec, z);
        break;
      case LayerKind::kGcn:
        z = gcn_layer_forward(tape, layer, spec, z, g);
        break;
      case LayerKind::kSage:
        z = sage_layer_forward(tape, layer, spec, z, g);
        break;
      case LayerKind::kGbk: {
        GbkLayerOut o = gbk_layer_forward(tape, layer, spec, z, g, mode);
        z = o.z;
        out.alphas.push_back(o.alpha);
        break;
      }
    }
  }
  out.logits = z;
  return out;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& file) {
  nlohmann::ordered_json doc;
  doc["seed"] = params.seed;
  doc["layers"] = nlohmann::ordered_json::array();
  for (const LayerSpec& s : params.specs) {
    doc["layers"].push_back({{"kind", to_string(s.kind)},
                             {"in_dim", s.in_dim},
                             {"out_dim", s.out_dim},
                             {"activation", activation_name(s.activation)},
                             {"gate_hidden_dim", s.gate_hidden_dim}});
  }
  nlohmann::ordered_json tensors;
  auto refs = param_refs(const_cast<ModelParams&>(params));
  for (const ParamRef& r : refs) {
    tensors[r.name] = {{"shape", {r.tensor->rows, r.tensor->cols}},
                       {"data", r.tensor->data}};
  }
  doc["params"] = std::move(tensors);
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + file.string());
  out << doc.dump(1) << "\n";
}

ModelParams load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + file.string());
  nlohmann::json doc;
  in >> doc;

  std::vector<LayerSpec> specs;
  for (const auto& layer : doc.at("layers")) {
    LayerSpec s;
    s.kind = layer_kind_from_string(layer.at("kind").get<std::string>());
    s.in_dim = layer.at("in_dim").get<int>();
    s.out_dim = layer.at("out_dim").get<int>();
    s.activation = activation_from_string(layer.at("activation").get<std::string>());
    s.gate_hidden_dim = layer.at("gate_hidden_dim").get<int>();
    specs.push_back(s);
  }
  ModelParams params = init_params(specs, doc.at("seed").get<std::uint64_t>());
  for (ParamRef& r : param_refs(params)) {
    const auto& t = doc.at("params").at(r.name);
    const int rows = t.at("shape").at(0).get<int>();
    const int cols = t.at("shape").at(1).get<int>();
    auto data = t.at("data").get<std::vector<double>>();
    *r.tensor = Tensor(rows, cols, std::move(data));
  }
  return params;
}

}  // namespace gbk

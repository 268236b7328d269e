#include "strla/train/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "strla/data/features.hpp"
#include "strla/engine/model.hpp"
#include "strla/error.hpp"
#include "strla/train/mlp.hpp"
#include "strla/xml/xml.hpp"

namespace strla::train {

using stree::Element;

GradcheckReport gradcheck(ad::ParameterStore& store, const std::function<ad::NodeId(ad::Tape&)>& loss,
                          bool corrupt_backward, double step, double floor) {
  std::vector<std::vector<double>> analytic(store.size());
  {
    ad::Tape tape(store);
    tape.corrupt_sigmoid_backward(corrupt_backward);
    ad::NodeId l = loss(tape);
    tape.backward(l);
    ad::Gradients grads;
    tape.accumulate_into(grads);
    for (std::size_t i = 0; i < store.size(); ++i) {
      auto id = static_cast<ad::ParamId>(i);
      if (grads.touched(id)) analytic[i] = grads.get(id);
      else analytic[i].assign(store[id].size(), 0.0);
    }
  }
  auto eval = [&] {
    ad::Tape tape(store);
    return tape.scalar(loss(tape));
  };

  GradcheckReport report;
  for (std::size_t i = 0; i < store.size(); ++i) {
    ad::Parameter& p = store[static_cast<ad::ParamId>(i)];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + step;
      const double up = eval();
      p.value[k] = saved - step;
      const double down = eval();
      p.value[k] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[i][k];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++report.checked;
      if (rel > report.max_rel_error || report.worst_parameter.empty()) {
        report.max_rel_error = rel;
        report.worst_parameter = p.name + "[" + std::to_string(k) + "]";
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

namespace {

const char* const kNames[] = {"a", "b", "c", "d"};

std::string random_text(std::mt19937_64& rng) {
  static const char alphabet[] = "xyzw";
  std::uniform_int_distribution<int> len(0, 4), ch(0, 3);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += alphabet[ch(rng)];
  return s;
}

Element random_primitive(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 2);
  switch (pick(rng)) {
    case 0:
      return Element::make_number(std::uniform_real_distribution<double>(-2.0, 2.0)(rng));
    case 1:
      return Element::make_text(random_text(rng));
    default: {
      static const stree::Tribool states[] = {stree::Tribool::True, stree::Tribool::False, stree::Tribool::Null};
      return Element::make_boolean(states[std::uniform_int_distribution<int>(0, 2)(rng)]);
    }
  }
}

}  // namespace

Element random_document(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> count(1, 3), kind(0, 3);
  Element obj = Element::make_object();
  for (int i = count(rng); i > 0; --i) {
    const char* name = kNames[std::uniform_int_distribution<int>(0, 3)(rng)];
    int k = depth > 0 ? kind(rng) : 0;
    if (k <= 1) {
      obj.members.push_back({name, random_primitive(rng)});
    } else if (k == 2) {
      Element arr = Element::make_array();
      for (int j = std::uniform_int_distribution<int>(0, 3)(rng); j > 0; --j)
        arr.items.push_back(depth > 1 && j == 1 ? random_document(rng, depth - 2) : random_primitive(rng));
      obj.members.push_back({name, std::move(arr)});
    } else {
      obj.members.push_back({name, random_document(rng, depth - 1)});
    }
  }
  return obj;
}

std::string random_xml(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> count(0, 3), coin(0, 1), attrs(0, 2);
  std::string tag = kNames[std::uniform_int_distribution<int>(0, 3)(rng)];
  std::string out = "<" + tag;
  for (int i = attrs(rng); i > 0; --i)
    out += std::string(" ") + (i == 1 ? "id" : "type") + "=\"" + random_text(rng) + "\"";
  out += ">";
  if (depth > 0) {
    for (int i = count(rng); i > 0; --i) out += coin(rng) ? random_xml(rng, depth - 1) : random_text(rng) + "q";
  } else {
    out += random_text(rng);
  }
  return out + "</" + tag + ">";
}

GradcheckReport gradcheck_model(const std::string& kind, std::uint64_t seed, bool corrupt_backward) {
  std::mt19937_64 rng(seed);
  const int m = 3;
  std::vector<Element> docs;
  for (int i = 0; i < 4; ++i) {
    if (kind == "xml") docs.push_back(xml::parse_xml_reduced("<doc>" + random_xml(rng, 2) + random_xml(rng, 1) + "</doc>"));
    else docs.push_back(random_document(rng));
  }
  std::vector<const Element*> ptrs;
  for (const auto& d : docs) ptrs.push_back(&d);
  auto perturb = [&](ad::ParameterStore& store) {
    std::normal_distribution<double> noise(0.0, 0.3);
    for (std::size_t i = 0; i < store.size(); ++i)
      for (double& v : store[static_cast<ad::ParamId>(i)].value) v += noise(rng);
  };

  if (kind == "mlp") {
    data::Featurizer f;
    f.fit(ptrs);
    Mlp mlp(f.width(), 5, 2, 3, seed);
    perturb(mlp.store());
    std::vector<double> x = f.transform(docs[0]);
    return gradcheck(mlp.store(), [&](ad::Tape& t) { return t.softmax_cross_entropy(mlp.logits(t, x), 1); },
                     corrupt_backward);
  }

  engine::ModelConfig config;
  config.kind = engine::parse_model_kind(kind);
  config.hidden = m;
  config.seed = seed;
  if (config.kind == engine::ModelKind::Set) config.set_layers = 2;
  if (config.kind == engine::ModelKind::Tailored) {
    config.mapping.add("object~", engine::Template::DeepSets);
    config.mapping.add("object~..", engine::Template::SumTreeLstm);
    config.mapping.add("array~..", engine::Template::ArrayLstm);
    config.mapping.add("string~a", engine::Template::CatEmbedding);
    config.mapping.add("string~..", engine::Template::EmbedString);
    config.mapping.add("number~b", engine::Template::CatEmbedding);
    config.mapping.add("number~..", engine::Template::EmbedNumber);
    config.mapping.add(".*", engine::Template::EmbedBoolean);
  }
  engine::Model model(config);
  model.build(ptrs, {"k0", "k1", "k2"});
  perturb(model.store());
  const Element& doc = docs[0];
  return gradcheck(model.store(), [&](ad::Tape& t) { return t.softmax_cross_entropy(model.logits(t, doc), 1); },
                   corrupt_backward);
}

}  // namespace strla::train

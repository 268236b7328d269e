#include <algorithm>
#include <random>

#include "doctest.h"
#include "strla/engine/model.hpp"
#include "strla/error.hpp"
#include "strla/xml/embed.hpp"
#include "strla/xml/xml.hpp"
#include "support.hpp"

using namespace strla;
using stree::Element;
using stree::Kind;

namespace {

constexpr int kM = 4;

struct AttributeFixture {
  ad::ParameterStore store;
  nn::Initializer init{5};
  std::map<std::string, xml::AttributeParams> attrs;
  nn::LstmParams tag;

  AttributeFixture() {
    tag = nn::make_lstm(store, init, "tag", kM, kM);
    for (const char* id : {"carriages", "colour", "speed"}) {
      xml::AttributeParams p;
      p.lstm = nn::make_lstm(store, init, std::string(id) + ".lstm", kM, kM);
      p.chars.unk = nn::make_embedding_row(store, init, std::string(id) + ".unk", kM);
      for (char ch : std::string("0123456789abcdefghijklmnopqrstuvwxyz"))
        p.chars.rows[static_cast<char32_t>(ch)] =
            nn::make_embedding_row(store, init, std::string(id) + "." + ch, kM);
      attrs.emplace(id, std::move(p));
    }
    support::randomize(store, 17);
  }

  std::vector<double> tag_value(std::span<const std::vector<double>> children,
                                std::span<const std::pair<std::string, std::string>> attributes) const {
    ad::Tape tape(store);
    std::vector<ad::NodeId> hs;
    for (const auto& c : children) hs.push_back(tape.constant(c, kM));
    std::vector<xml::AttributeInput> in;
    for (const auto& [id, v] : attributes) in.push_back({&attrs.at(id), v});
    auto out = tape.value(xml::embed_tag(tape, tag, hs, in));
    return {out.begin(), out.end()};
  }

  std::vector<double> attribute_value(const std::string& id, const std::string& value) const {
    ad::Tape tape(store);
    auto out = tape.value(xml::embed_attribute(tape, attrs.at(id), value));
    return {out.begin(), out.end()};
  }
};

}  // namespace

TEST_CASE("tags with attributes and text map into the tree model") {
  Element e = xml::parse_xml_reduced(R"(<train carriages="6"><shop>false</shop></train>)");
  REQUIRE(e.kind == Kind::Object);
  REQUIRE(e.members.size() == 1);
  CHECK(e.members[0].name == "train");
  const Element& train = e.members[0].value;
  REQUIRE(train.kind == Kind::Object);
  REQUIRE(train.description.size() == 1);
  CHECK(train.description[0].first == "carriages");
  CHECK(train.description[0].second == "6");
  REQUIRE(train.members.size() == 1);
  CHECK(train.members[0].name == "shop");
  CHECK(train.members[0].value.kind == Kind::Text);
  CHECK(train.members[0].value.text == "false");
}

TEST_CASE("empty-tag form equals an empty element") {
  Element a = xml::parse_xml_reduced("<a/>");
  Element b = xml::parse_xml_reduced("<a></a>");
  Element c = xml::parse_xml_reduced("<a>  \n </a>");
  CHECK(stree::structurally_equal(a, b));
  CHECK(stree::structurally_equal(a, c));
  REQUIRE(a.members.size() == 1);
  CHECK(a.members[0].name == "a");
  CHECK(a.members[0].value.kind == Kind::Object);
  CHECK(a.members[0].value.members.empty());

  Element d = xml::parse_xml_reduced(R"(<r><x k="1" j='2'/><y/></r>)");
  Element f = xml::parse_xml_reduced(R"(<r><x k="1" j='2'></x><y></y></r>)");
  CHECK(stree::structurally_equal(d, f));
  CHECK(d.members[0].value.members[0].value.description.size() == 2);
}

TEST_CASE("headers, comments and processing instructions are skipped") {
  Element e = xml::parse_xml_reduced(
      "<?xml version=\"1.0\"?>\n<!DOCTYPE r>\n<!-- note --><r><?pi x?><a>1</a><![CDATA[ignored]]><!-- c --></r>");
  REQUIRE(e.members.size() == 1);
  const Element& r = e.members[0].value;
  REQUIRE(r.members.size() == 1);
  CHECK(r.members[0].value.text == "1");
}

TEST_CASE("mixed content keeps text runs as members") {
  Element e = xml::parse_xml_reduced("<p>hello <b>x</b> world</p>");
  const Element& p = e.members[0].value;
  REQUIRE(p.members.size() == 3);
  CHECK(p.members[0].name == xml::kTextMember);
  CHECK(p.members[0].value.text == "hello");
  CHECK(p.members[1].name == "b");
  CHECK(p.members[2].value.text == "world");
}

TEST_CASE("malformed XML and entity references are rejected") {
  CHECK_THROWS_AS(xml::parse_xml_reduced("<a><b></a></b>"), SyntaxError);
  CHECK_THROWS_AS(xml::parse_xml_reduced("<a>"), SyntaxError);
  CHECK_THROWS_AS(xml::parse_xml_reduced("<a></a><b></b>"), SyntaxError);
  CHECK_THROWS_AS(xml::parse_xml_reduced("<a x=1></a>"), SyntaxError);
  try {
    xml::parse_xml_reduced("<a>fish &amp; chips</a>");
    FAIL("expected Unsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unsupported);
  }
  try {
    xml::parse_xml_reduced(R"(<a v="&#65;"/>)");
    FAIL("expected Unsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unsupported);
  }
}

TEST_CASE("attribute embedding degenerate cases") {
  AttributeFixture f;
  CHECK(f.attribute_value("colour", "") == std::vector<double>(kM, 0.0));

  // One character: the single hidden state.
  const auto& p = f.attrs.at("colour");
  auto [cell, hs] = support::lstm_run(f.store, p.lstm, {support::param(f.store, p.chars.lookup('r'))});
  CHECK(support::max_abs_diff(f.attribute_value("colour", "r"), cell.h) < 1e-15);

  support::zero_all(f.store);
  CHECK(f.attribute_value("carriages", "6") == std::vector<double>(kM, 0.0));
}

TEST_CASE("tag embedding degenerate cases") {
  AttributeFixture f;
  CHECK(f.tag_value({}, {}) == std::vector<double>(kM, 0.0));

  std::vector<std::pair<std::string, std::string>> two{{"colour", "red"}, {"speed", "fast"}};
  auto sum = support::add(f.attribute_value("colour", "red"), f.attribute_value("speed", "fast"));
  CHECK(support::max_abs_diff(f.tag_value({}, two), sum) < 1e-15);

  // A zero tag LSTM contributes nothing, leaving the attribute sum.
  for (ad::ParamId id : {f.tag.w, f.tag.v, f.tag.b}) std::fill(f.store[id].value.begin(), f.store[id].value.end(), 0.0);
  std::vector<std::vector<double>> child{{0.3, -0.2, 0.9, 0.1}};
  auto with_child = f.tag_value(child, two);
  auto attrs_only = f.tag_value({}, two);
  CHECK(support::max_abs_diff(with_child, attrs_only) == 0.0);
}

TEST_CASE("attribute sum is invariant under permutation") {
  AttributeFixture f;
  std::mt19937_64 rng(23);
  std::vector<std::pair<std::string, std::string>> attrs{
      {"carriages", "6"}, {"colour", "blue"}, {"speed", "125"}, {"colour", "x9"}, {"speed", ""}};
  std::vector<std::vector<double>> kids{{0.5, 0.1, -0.4, 0.2}, {-0.3, 0.8, 0.0, 0.6}};
  auto base = f.tag_value(kids, attrs);
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(attrs.begin(), attrs.end(), rng);
    auto v = f.tag_value(kids, attrs);
    for (int i = 0; i < kM; ++i) CHECK(std::abs(v[i] - base[i]) <= 1e-9 * std::max(1.0, std::abs(base[i])));
  }
}

TEST_CASE("tag embedding is sensitive to child order") {
  AttributeFixture f;
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  bool witness = false;
  for (int trial = 0; trial < 100 && !witness; ++trial) {
    support::randomize(f.store, 100 + static_cast<std::uint64_t>(trial));
    std::vector<std::vector<double>> kids(2, std::vector<double>(kM));
    for (auto& k : kids)
      for (double& v : k) v = u(rng);
    auto ab = f.tag_value(kids, {});
    std::swap(kids[0], kids[1]);
    auto ba = f.tag_value(kids, {});
    witness = support::max_abs_diff(ab, ba) > 1e-9;
  }
  CHECK(witness);
}

TEST_CASE("xml model keys attribute parameters by id and handles unseen ids") {
  engine::ModelConfig cfg;
  cfg.kind = engine::ModelKind::Xml;
  cfg.hidden = kM;
  engine::Model model(cfg);
  Element a = xml::parse_xml_reduced(R"(<t n="1"><u n="22">x</u></t>)");
  Element b = xml::parse_xml_reduced(R"(<t m="3"><u>y</u></t>)");
  std::vector<const Element*> docs{&a, &b};
  model.build(docs, {"p", "q"});
  CHECK(model.attribute("n") != nullptr);
  CHECK(model.attribute("m") != nullptr);
  CHECK(model.attribute("n") != model.attribute("m"));
  Element unseen = xml::parse_xml_reduced(R"(<t zz="7"><u>y</u></t>)");
  auto z = model.predict_logits(unseen);
  CHECK(z.size() == 2);
  for (double v : z) CHECK(std::isfinite(v));
}

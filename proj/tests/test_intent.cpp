#include <doctest.h>

#include <random>

#include "benchoracle/intent.hpp"

using namespace benchoracle;

namespace {

class FixedProber : public ConnectivityProber {
 public:
  explicit FixedProber(bool up) : up_(up) {}
  bool reachable(const AddDevice&) const override { return up_; }

 private:
  bool up_;
};

StoreSnapshot small_store() {
  StoreSnapshot s;
  s.register_technique({"MobileNet-V2", "threat-detection", ""});
  s.register_device({"edge_1", "warehouse_5", true});
  s.register_device({"edge_2", "warehouse_5", false});
  s.record(0, 0, 1.0, Provenance::measured);
  return s;
}

}  // namespace

TEST_CASE("parse the two intent templates") {
  CHECK(parse_intent("add device edge_100 to domain warehouse_5") ==
        StructuredIntent{AddDevice{"edge_100", "warehouse_5"}});
  CHECK(parse_intent("add ML-technique MobileNet-V2 to ML-technique type threat-detection") ==
        StructuredIntent{AddTechnique{"MobileNet-V2", "threat-detection"}});
  CHECK(parse_intent("  ADD Device Edge_7 TO DOMAIN Store_1\n") ==
        StructuredIntent{AddDevice{"Edge_7", "Store_1"}});
  CHECK(parse_intent("add ml-technique X to Ml-Technique TYPE y\t") ==
        StructuredIntent{AddTechnique{"X", "y"}});
}

TEST_CASE("unsupported intents report the nearest template") {
  try {
    parse_intent("delete device x");
    FAIL("expected parse error");
  } catch (const IntentParseError& e) {
    CHECK(e.kind() == IntentParseError::Kind::no_template_match);
    CHECK(e.hint() == kAddDeviceTemplate);
  }
  try {
    parse_intent("add ML-technique foo");
    FAIL("expected parse error");
  } catch (const IntentParseError& e) {
    CHECK(e.hint() == kAddTechniqueTemplate);
  }
  CHECK_THROWS_AS(parse_intent(""), IntentParseError);
  CHECK_THROWS_AS(parse_intent("add device a to domain b extra"), IntentParseError);
}

TEST_CASE("missing identifiers are named") {
  try {
    parse_intent("add device to domain warehouse_5");
    FAIL("expected parse error");
  } catch (const IntentParseError& e) {
    CHECK(e.kind() == IntentParseError::Kind::missing_identifier);
    CHECK(std::string(e.what()).find("device_id") != std::string::npos);
  }
  try {
    parse_intent("add ML-technique MobileNet to ML-technique type");
    FAIL("expected parse error");
  } catch (const IntentParseError& e) {
    CHECK(e.kind() == IntentParseError::Kind::missing_identifier);
    CHECK(std::string(e.what()).find("ML-tech_type_name") != std::string::npos);
  }
}

TEST_CASE("structured JSON uses the exact key names") {
  CHECK(to_structured_json(AddDevice{"edge_100", "warehouse_5"}) ==
        R"({"intent_name": "adding device", "device": "edge_100", "domain": "warehouse_5"})");
  CHECK(to_structured_json(AddTechnique{"MobileNet-V2-threat_1", "threat-detection"}) ==
        R"({"intent_name": "adding ML-technique", "ML-technique": "MobileNet-V2-threat_1", "ML-technique_type": "threat-detection"})");
  CHECK_THROWS_AS(parse_structured_json(R"({"intent_name": "adding router"})"), IntentParseError);
  CHECK_THROWS_AS(parse_structured_json(R"({"intent_name": "adding device", "device": "a b", "domain": "x"})"),
                  IntentParseError);
  CHECK_THROWS_AS(parse_structured_json("not json"), IntentParseError);
}

TEST_CASE("JSON round trip and grammar totality (property)") {
  std::mt19937_64 rng(11);
  const std::string alphabet = "abcXYZ019_-.:/";
  auto ident = [&] {
    std::string s;
    const std::size_t len = 1 + rng() % 12;
    for (std::size_t k = 0; k < len; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const StructuredIntent intent = trial % 2 ? StructuredIntent{AddDevice{ident(), ident()}}
                                              : StructuredIntent{AddTechnique{ident(), ident()}};
    CHECK(parse_structured_json(to_structured_json(intent)) == intent);
  }

  const std::vector<std::string> words = {"add", "device", "to", "domain", "ML-technique",
                                          "type", "x", "ADD", "", "\t", "remove"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const std::size_t n = rng() % 9;
    for (std::size_t k = 0; k < n; ++k) text += words[rng() % words.size()] + " ";
    try {
      const StructuredIntent parsed = parse_intent(text);
      // A successful parse must reproduce the canonical form.
      CHECK(parse_intent(std::visit(
                [](const auto& v) -> std::string {
                  using T = std::decay_t<decltype(v)>;
                  if constexpr (std::is_same_v<T, AddDevice>)
                    return "add device " + v.device + " to domain " + v.domain;
                  else
                    return "add ML-technique " + v.technique + " to ML-technique type " +
                           v.technique_type;
                },
                parsed)) == parsed);
    } catch (const IntentParseError&) {
    }
  }
}

TEST_CASE("policy checks for new devices") {
  const StoreSnapshot store = small_store();
  int triggered = 0;
  auto trigger = [&](const StructuredIntent&) { ++triggered; };

  auto ok = configure_policies(AddDevice{"edge_100", "warehouse_5"}, store, FixedProber(true), trigger);
  CHECK(ok.all_passed());
  CHECK(ok.triggered_recommender);
  CHECK(triggered == 1);

  auto down = configure_policies(AddDevice{"edge_100", "warehouse_5"}, store, FixedProber(false), trigger);
  CHECK_FALSE(down.triggered_recommender);
  REQUIRE(down.alerts.size() == 1);
  CHECK(down.alerts[0] == "connectivity check failed for edge_100");
  CHECK(triggered == 1);

  // Default prober reads the stored flag for registered devices.
  auto registered = configure_policies(AddDevice{"edge_2", "warehouse_5"}, store, trigger);
  CHECK_FALSE(registered.triggered_recommender);
  CHECK(registered.alerts.size() == 2);
  CHECK(registered.alerts[0] == "connectivity check failed for edge_2");
}

TEST_CASE("policy checks for new techniques") {
  const StoreSnapshot store = small_store();
  const StoreSnapshot copy = store;
  int triggered = 0;
  auto trigger = [&](const StructuredIntent&) { ++triggered; };

  auto dup = configure_policies(AddTechnique{"MobileNet-V2", "threat-detection"}, store, trigger);
  CHECK_FALSE(dup.triggered_recommender);
  CHECK_FALSE(dup.alerts.empty());
  CHECK(triggered == 0);

  auto fresh = configure_policies(AddTechnique{"Inception-V3", "threat-detection"}, store, trigger);
  CHECK(fresh.triggered_recommender);
  CHECK(triggered == 1);
  CHECK(store == copy);

  const std::string json = to_json(fresh);
  CHECK(json.find("\"triggered_recommender\":true") != std::string::npos);
}

#include "benchoracle/intent.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <json.hpp>

namespace benchoracle {

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kAddingDevice = "adding device";
constexpr std::string_view kAddingTechnique = "adding ML-technique";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string_view> tokenize(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t k = 0;
  while (k < text.size()) {
    while (k < text.size() && is_space(text[k])) ++k;
    const std::size_t start = k;
    while (k < text.size() && !is_space(text[k])) ++k;
    if (k > start) tokens.push_back(text.substr(start, k - start));
  }
  return tokens;
}

bool keyword(std::string_view token, std::string_view word) {
  return token.size() == word.size() &&
         std::equal(token.begin(), token.end(), word.begin(), [](char a, char b) {
           return std::tolower(static_cast<unsigned char>(a)) ==
                  std::tolower(static_cast<unsigned char>(b));
         });
}

// Keywords of each template with their positions; identifier slots are the
// positions not listed.
struct Template {
  std::string_view form;
  std::size_t length;
  std::vector<std::pair<std::size_t, std::string_view>> keywords;
};

const std::array<Template, 2>& templates() {
  static const std::array<Template, 2> t{{
      {kAddDeviceTemplate, 6, {{0, "add"}, {1, "device"}, {3, "to"}, {4, "domain"}}},
      {kAddTechniqueTemplate,
       7,
       {{0, "add"}, {1, "ML-technique"}, {3, "to"}, {4, "ML-technique"}, {5, "type"}}},
  }};
  return t;
}

// Does `tokens` match template `t` when identifier slot `skip` is absent?
bool matches_without(const Template& t, const std::vector<std::string_view>& tokens,
                     std::size_t skip) {
  if (tokens.size() + 1 != t.length) return false;
  for (const auto& [pos, word] : t.keywords) {
    const std::size_t at = pos > skip ? pos - 1 : pos;
    if (!keyword(tokens[at], word)) return false;
  }
  return true;
}

bool matches(const Template& t, const std::vector<std::string_view>& tokens) {
  if (tokens.size() != t.length) return false;
  return std::all_of(t.keywords.begin(), t.keywords.end(), [&](const auto& kw) {
    return keyword(tokens[kw.first], kw.second);
  });
}

std::string nearest_template(const std::vector<std::string_view>& tokens) {
  std::size_t best = 0;
  std::size_t best_score = 0;
  for (std::size_t t = 0; t < templates().size(); ++t) {
    std::size_t score = 0;
    for (const auto& [pos, word] : templates()[t].keywords) {
      score += std::count_if(tokens.begin(), tokens.end(),
                             [&](std::string_view tok) { return keyword(tok, word); }) > 0;
      if (pos < tokens.size() && keyword(tokens[pos], word)) ++score;
    }
    if (score > best_score) {
      best_score = score;
      best = t;
    }
  }
  return std::string(templates()[best].form);
}

void check_identifier(const std::string& id, const char* field) {
  if (id.empty() || std::any_of(id.begin(), id.end(), is_space)) {
    throw IntentParseError(IntentParseError::Kind::missing_identifier,
                           std::string("field '") + field +
                               "' must be a nonempty identifier without whitespace",
                           "");
  }
}

}  // namespace

StructuredIntent parse_intent(std::string_view text) {
  const auto tokens = tokenize(text);
  const auto& device = templates()[0];
  const auto& technique = templates()[1];

  if (matches(device, tokens)) {
    return AddDevice{std::string(tokens[2]), std::string(tokens[5])};
  }
  if (matches(technique, tokens)) {
    return AddTechnique{std::string(tokens[2]), std::string(tokens[6])};
  }

  const std::array<std::pair<const Template*, std::array<std::pair<std::size_t, const char*>, 2>>, 2>
      slots{{{&device, {{{2, "device_id"}, {5, "domain_id"}}}},
             {&technique, {{{2, "ML-tech_id"}, {6, "ML-tech_type_name"}}}}}};
  for (const auto& [t, ids] : slots) {
    for (const auto& [slot, name] : ids) {
      if (matches_without(*t, tokens, slot)) {
        throw IntentParseError(IntentParseError::Kind::missing_identifier,
                               std::string("intent is missing the ") + name +
                                   " identifier; expected: " + std::string(t->form),
                               std::string(t->form));
      }
    }
  }

  std::string hint = nearest_template(tokens);
  throw IntentParseError(IntentParseError::Kind::no_template_match,
                         "intent '" + std::string(text) +
                             "' matches no template; did you mean: " + hint,
                         hint);
}

std::string to_structured_json(const StructuredIntent& intent) {
  ordered_json doc = std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AddDevice>) {
          return {{"intent_name", kAddingDevice}, {"device", v.device}, {"domain", v.domain}};
        } else {
          return {{"intent_name", kAddingTechnique},
                  {"ML-technique", v.technique},
                  {"ML-technique_type", v.technique_type}};
        }
      },
      intent);
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : doc.items()) {
    if (!first) out += ", ";
    first = false;
    out += ordered_json(key).dump() + ": " + value.dump();
  }
  out += "}";
  return out;
}

StructuredIntent parse_structured_json(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::exception& e) {
    throw IntentParseError(IntentParseError::Kind::no_template_match,
                           std::string("structured intent is not valid JSON: ") + e.what(),
                           "");
  }
  auto field = [&](const char* key) -> std::string {
    if (!doc.is_object() || !doc.contains(key) || !doc.at(key).is_string()) {
      throw IntentParseError(IntentParseError::Kind::missing_identifier,
                             std::string("structured intent lacks string field '") + key + "'",
                             "");
    }
    std::string v = doc.at(key).get<std::string>();
    check_identifier(v, key);
    return v;
  };
  if (!doc.is_object() || !doc.contains("intent_name") || !doc["intent_name"].is_string()) {
    throw IntentParseError(IntentParseError::Kind::no_template_match,
                           "structured intent lacks intent_name", "");
  }
  const std::string name = doc["intent_name"].get<std::string>();
  if (name == kAddingDevice) return AddDevice{field("device"), field("domain")};
  if (name == kAddingTechnique) {
    return AddTechnique{field("ML-technique"), field("ML-technique_type")};
  }
  throw IntentParseError(IntentParseError::Kind::no_template_match,
                         "unknown intent_name '" + name + "'", "");
}

bool PolicyOutcome::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const PolicyCheck& c) { return c.passed; });
}

bool RecordConnectivityProber::reachable(const AddDevice& intent) const {
  if (const DeviceRecord* d = store_.find_device(intent.device)) {
    return d->connectivity;
  }
  return unregistered_default_;
}

PolicyOutcome configure_policies(const StructuredIntent& intent,
                                 const StoreSnapshot& store,
                                 const ConnectivityProber& prober,
                                 const RecommenderTrigger& trigger) {
  PolicyOutcome outcome;
  auto check = [&](std::string name, bool passed, std::string message) {
    if (!passed) outcome.alerts.push_back(message);
    outcome.checks.push_back(PolicyCheck{std::move(name), passed, std::move(message)});
  };

  if (const auto* d = std::get_if<AddDevice>(&intent)) {
    const bool reachable = prober.reachable(*d);
    check("connectivity", reachable,
          reachable ? "device " + d->device + " is reachable"
                    : "connectivity check failed for " + d->device);
    const bool fresh = store.find_device(d->device) == nullptr;
    check("device-registration", fresh,
          fresh ? "device " + d->device + " is not yet benchmarked"
                : "device " + d->device + " is already registered in the store");
  } else {
    const auto& t = std::get<AddTechnique>(intent);
    const bool has_type = !t.technique_type.empty();
    check("technique-type", has_type,
          has_type ? "ML-technique type " + t.technique_type + " accepted"
                   : "ML-technique type must be nonempty");
    const TechniqueRecord* existing = store.find_technique(t.technique);
    check("technique-existence", existing == nullptr,
          existing == nullptr
              ? "ML-technique " + t.technique + " is new to the ML techniques store"
              : "ML-technique " + t.technique +
                    " already exists in the ML techniques store (type " +
                    existing->technique_type + ")");
  }

  if (outcome.all_passed()) {
    outcome.triggered_recommender = true;
    if (trigger) trigger(intent);
  }
  return outcome;
}

PolicyOutcome configure_policies(const StructuredIntent& intent,
                                 const StoreSnapshot& store,
                                 const RecommenderTrigger& trigger) {
  RecordConnectivityProber prober(store);
  return configure_policies(intent, store, prober, trigger);
}

std::string to_json(const PolicyOutcome& outcome) {
  ordered_json checks = ordered_json::array();
  for (const auto& c : outcome.checks) {
    checks.push_back({{"check", c.name}, {"passed", c.passed}, {"message", c.message}});
  }
  ordered_json doc{{"checks", checks},
                   {"alerts", outcome.alerts},
                   {"triggered_recommender", outcome.triggered_recommender}};
  return doc.dump();
}

}  // namespace benchoracle

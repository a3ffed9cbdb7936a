#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "benchoracle/errors.hpp"
#include "benchoracle/knowledge_base.hpp"

namespace benchoracle {

// "add device <device> to domain <domain>"
struct AddDevice {
  std::string device;
  std::string domain;

  friend bool operator==(const AddDevice&, const AddDevice&) = default;
};

// "add ML-technique <technique> to ML-technique type <technique_type>"
struct AddTechnique {
  std::string technique;
  std::string technique_type;

  friend bool operator==(const AddTechnique&, const AddTechnique&) = default;
};

using StructuredIntent = std::variant<AddDevice, AddTechnique>;

class IntentParseError : public Error {
 public:
  enum class Kind { no_template_match, missing_identifier };

  IntentParseError(Kind kind, const std::string& what, std::string hint)
      : Error(ErrorCategory::parse, what), kind_(kind), hint_(std::move(hint)) {}

  Kind kind() const noexcept { return kind_; }
  // The template the input most resembles.
  const std::string& hint() const noexcept { return hint_; }

 private:
  Kind kind_;
  std::string hint_;
};

inline constexpr std::string_view kAddDeviceTemplate =
    "add device <device_id> to domain <domain_id>";
inline constexpr std::string_view kAddTechniqueTemplate =
    "add ML-technique <ML-tech_id> to ML-technique type <ML-tech_type_name>";

// Keywords match case-insensitively; identifiers are kept verbatim.
StructuredIntent parse_intent(std::string_view text);

// {"intent_name": "adding device", "device": ..., "domain": ...} or
// {"intent_name": "adding ML-technique", "ML-technique": ..., "ML-technique_type": ...}
std::string to_structured_json(const StructuredIntent& intent);
StructuredIntent parse_structured_json(std::string_view json_text);

struct PolicyCheck {
  std::string name;
  bool passed = false;
  std::string message;
};

struct PolicyOutcome {
  std::vector<PolicyCheck> checks;
  std::vector<std::string> alerts;
  bool triggered_recommender = false;

  bool all_passed() const;
};

class ConnectivityProber {
 public:
  virtual ~ConnectivityProber() = default;
  virtual bool reachable(const AddDevice& intent) const = 0;
};

// Reads the connectivity flag of a registered device. Devices not yet in the
// store report `unregistered_default`.
class RecordConnectivityProber : public ConnectivityProber {
 public:
  explicit RecordConnectivityProber(const StoreSnapshot& store,
                                    bool unregistered_default = true)
      : store_(store), unregistered_default_(unregistered_default) {}

  bool reachable(const AddDevice& intent) const override;

 private:
  const StoreSnapshot& store_;
  bool unregistered_default_;
};

using RecommenderTrigger = std::function<void(const StructuredIntent&)>;

// Runs the checks for the intent against the store and calls `trigger` only
// when every check passed. Never touches the store itself.
PolicyOutcome configure_policies(const StructuredIntent& intent,
                                 const StoreSnapshot& store,
                                 const ConnectivityProber& prober,
                                 const RecommenderTrigger& trigger = {});
PolicyOutcome configure_policies(const StructuredIntent& intent,
                                 const StoreSnapshot& store,
                                 const RecommenderTrigger& trigger = {});

std::string to_json(const PolicyOutcome& outcome);

}  // namespace benchoracle

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dd2/scenario.h"
#include "json.hpp"

namespace dd2 {

// Node ids are prefixed by kind: "event:<id>", "choice:<event>/<choice>",
// "upgrade:<id>", "resistance:<id>".
struct GraphNode {
  enum class Kind { Event, Choice, Upgrade, Resistance };
  Kind kind;
  std::string id;
  std::string label;
  std::string parent;  // owning event node for choices
};

// trigger: choice -> event, ignore: event -> event (the ignore trigger),
// guard: upgrade/event/choice -> event from an eligibility reference,
// block: resistance -> event.
struct GraphEdge {
  enum class Kind { Trigger, Ignore, Guard, Block };
  Kind kind;
  std::string from;
  std::string to;
  // Trigger/Ignore: "+<delay>" and bypass flag; Guard: negated polarity.
  int delay = 0;
  bool bypass = false;
  bool negated = false;
};

struct EventGraph {
  std::vector<GraphNode> nodes;  // sorted by id
  std::vector<GraphEdge> edges;  // sorted by (from, to, kind, ...)

  const GraphNode* find(std::string_view id) const;
  std::size_t count(GraphEdge::Kind k) const;
};

std::string_view edge_kind_name(GraphEdge::Kind k);
std::string_view node_kind_name(GraphNode::Kind k);

EventGraph build_event_graph(const Scenario& s);

// Byte-stable DOT. An empty graph gives the preamble plus "digraph scenario {}".
std::string emit_dot(const EventGraph& g);

struct ReachabilityReport {
  std::vector<std::string> unreachable_events;
  std::vector<std::string> dead_choices;  // "<event>/<choice>"
  std::vector<std::vector<std::string>> trigger_cycles;
  std::vector<std::string> unsatisfiable_conditions;  // event or upgrade ids
};

ReachabilityReport reachability_report(const Scenario& s);
nlohmann::json reachability_to_json(const ReachabilityReport& r);

struct CardDocument {
  std::string filename;
  std::string html;
};

struct CardDeck {
  std::vector<CardDocument> cards;  // one per event then one per upgrade, authored order
  CardDocument index;
};

// Public fields only: titles, descriptions, categories, choice labels and
// costs, upgrade names, assets and costs.
CardDeck export_cards(const Scenario& s);
void write_cards(const CardDeck& deck, const std::filesystem::path& dir);

// "1 hour", "8 hours"; "£20,000", "-£5,000".
std::string format_hours(Hours h);
std::string format_money(Money m);

}  // namespace dd2

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "dd2/analysis.h"

namespace dd2 {

std::string_view edge_kind_name(GraphEdge::Kind k) {
  switch (k) {
    case GraphEdge::Kind::Trigger: return "trigger";
    case GraphEdge::Kind::Ignore: return "ignore";
    case GraphEdge::Kind::Guard: return "guard";
    case GraphEdge::Kind::Block: return "block";
  }
  return "?";
}

std::string_view node_kind_name(GraphNode::Kind k) {
  switch (k) {
    case GraphNode::Kind::Event: return "event";
    case GraphNode::Kind::Choice: return "choice";
    case GraphNode::Kind::Upgrade: return "upgrade";
    case GraphNode::Kind::Resistance: return "resistance";
  }
  return "?";
}

const GraphNode* EventGraph::find(std::string_view id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id, [](const GraphNode& n, std::string_view k) { return n.id < k; });
  return it != nodes.end() && it->id == id ? &*it : nullptr;
}

std::size_t EventGraph::count(GraphEdge::Kind k) const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const GraphEdge& e) { return e.kind == k; }));
}

namespace {

std::string event_node(const std::string& id) { return "event:" + id; }
std::string choice_node(const std::string& e, const std::string& c) { return "choice:" + e + "/" + c; }

auto edge_key(const GraphEdge& e) { return std::tie(e.from, e.to, e.kind, e.delay, e.bypass, e.negated); }

}  // namespace

EventGraph build_event_graph(const Scenario& s) {
  EventGraph g;
  for (const auto& e : s.events) {
    g.nodes.push_back({GraphNode::Kind::Event, event_node(e.id), e.title, {}});
    for (const auto& c : e.choices) {
      g.nodes.push_back({GraphNode::Kind::Choice, choice_node(e.id, c.id), c.label, event_node(e.id)});
      for (const auto& t : c.triggers)
        g.edges.push_back({GraphEdge::Kind::Trigger, choice_node(e.id, c.id), event_node(t.event_id), t.delay_rounds,
                           t.bypass_criteria, false});
    }
    if (e.ignore_trigger)
      g.edges.push_back({GraphEdge::Kind::Ignore, event_node(e.id), event_node(e.ignore_trigger->event_id),
                         e.ignore_trigger->delay_rounds, e.ignore_trigger->bypass_criteria, false});
    for (const auto& ref : collect_signed_refs(e.eligibility)) {
      std::string from = ref.kind == SignedRef::Kind::Upgrade ? "upgrade:" + ref.id
                         : ref.kind == SignedRef::Kind::Event ? event_node(ref.id)
                                                              : choice_node(ref.id, ref.choice_id);
      g.edges.push_back({GraphEdge::Kind::Guard, std::move(from), event_node(e.id), 0, false, ref.negated});
    }
    for (const auto& r : e.blocked_by)
      g.edges.push_back({GraphEdge::Kind::Block, "resistance:" + r, event_node(e.id), 0, false, false});
  }
  for (const auto& u : s.upgrades) g.nodes.push_back({GraphNode::Kind::Upgrade, "upgrade:" + u.id, u.name, {}});
  for (const auto& r : s.resistances)
    g.nodes.push_back({GraphNode::Kind::Resistance, "resistance:" + r.id, r.name, {}});

  std::sort(g.nodes.begin(), g.nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  // Dangling guard sources (e.g. a choice id that does not exist) are dropped
  // so every edge endpoint resolves; validation reports them separately.
  std::erase_if(g.edges, [&](const GraphEdge& e) { return !g.find(e.from) || !g.find(e.to); });
  std::sort(g.edges.begin(), g.edges.end(), [](const auto& a, const auto& b) { return edge_key(a) < edge_key(b); });
  return g;
}

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string_view shape(GraphNode::Kind k) {
  switch (k) {
    case GraphNode::Kind::Event: return "box";
    case GraphNode::Kind::Choice: return "ellipse";
    case GraphNode::Kind::Upgrade: return "component";
    case GraphNode::Kind::Resistance: return "octagon";
  }
  return "box";
}

void emit_node(std::ostringstream& os, const GraphNode& n, std::string_view indent) {
  os << indent << quote(n.id) << " [kind=" << node_kind_name(n.kind) << ", shape=" << shape(n.kind)
     << ", label=" << quote(n.label) << "];\n";
}

}  // namespace

std::string emit_dot(const EventGraph& g) {
  std::ostringstream os;
  os << "// dd2 event graph\n";
  if (g.nodes.empty() && g.edges.empty()) {
    os << "digraph scenario {}\n";
    return os.str();
  }
  os << "digraph scenario {\n";
  os << "  rankdir=LR;\n";
  os << "  node [fontname=\"Helvetica\", fontsize=10];\n";
  os << "  edge [fontname=\"Helvetica\", fontsize=9];\n";

  // Each event with its choices in one cluster; everything else at top level.
  for (const auto& n : g.nodes) {
    if (n.kind != GraphNode::Kind::Event) continue;
    os << "  subgraph " << quote("cluster_" + n.id) << " {\n";
    os << "    style=rounded;\n";
    emit_node(os, n, "    ");
    for (const auto& c : g.nodes)
      if (c.kind == GraphNode::Kind::Choice && c.parent == n.id) emit_node(os, c, "    ");
    os << "  }\n";
  }
  for (const auto& n : g.nodes)
    if (n.kind == GraphNode::Kind::Upgrade || n.kind == GraphNode::Kind::Resistance) emit_node(os, n, "  ");

  for (const auto& e : g.edges) {
    os << "  " << quote(e.from) << " -> " << quote(e.to) << " [kind=" << edge_kind_name(e.kind);
    switch (e.kind) {
      case GraphEdge::Kind::Trigger:
      case GraphEdge::Kind::Ignore:
        os << ", label=" << quote("+" + std::to_string(e.delay) + (e.bypass ? " bypass" : ""))
           << ", style=" << (e.kind == GraphEdge::Kind::Ignore ? "dashed" : "solid");
        if (e.bypass) os << ", color=red";
        break;
      case GraphEdge::Kind::Guard:
        os << ", style=dotted, arrowhead=" << (e.negated ? "tee" : "normal");
        if (e.negated) os << ", negated=true";
        break;
      case GraphEdge::Kind::Block: os << ", style=bold, color=blue, arrowhead=tee"; break;
    }
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

ReachabilityReport reachability_report(const Scenario& s) {
  ReachabilityReport r;
  const auto reachable_list = reachable_events(s);
  const std::set<std::string> reachable(reachable_list.begin(), reachable_list.end());

  Hours bonus = 0;
  for (const auto& e : s.events)
    if (e.on_draw_effects && e.on_draw_effects->hours_delta > 0) bonus += e.on_draw_effects->hours_delta;

  for (const auto& e : s.events) {
    const bool live = reachable.contains(e.id);
    if (!live) r.unreachable_events.push_back(e.id);
    if (!condition_satisfiable(e.eligibility, s)) r.unsatisfiable_conditions.push_back(e.id);
    for (const auto& c : e.choices)
      if (!live || c.hours_cost > s.config.starting_hours + bonus) r.dead_choices.push_back(e.id + "/" + c.id);
  }
  for (const auto& u : s.upgrades)
    if (!condition_satisfiable(u.prerequisites, s)) r.unsatisfiable_conditions.push_back(u.id);
  r.trigger_cycles = trigger_cycles(s);
  std::sort(r.unreachable_events.begin(), r.unreachable_events.end());
  std::sort(r.dead_choices.begin(), r.dead_choices.end());
  std::sort(r.unsatisfiable_conditions.begin(), r.unsatisfiable_conditions.end());
  return r;
}

nlohmann::json reachability_to_json(const ReachabilityReport& r) {
  return {{"unreachable_events", r.unreachable_events},
          {"dead_choices", r.dead_choices},
          {"trigger_cycles", r.trigger_cycles},
          {"unsatisfiable_conditions", r.unsatisfiable_conditions}};
}

}  // namespace dd2

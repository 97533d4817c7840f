#include "tqa/graphbuild.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

namespace tqa {

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Textual:
      return "textual";
    case GraphKind::VisualContext:
      return "visual_context";
    case GraphKind::QuestionDiagram:
      return "question_diagram";
  }
  return "textual";
}

int GraphCaps::for_kind(GraphKind kind) const {
  switch (kind) {
    case GraphKind::Textual:
      return textual;
    case GraphKind::VisualContext:
      return visual;
    case GraphKind::QuestionDiagram:
      return question_diagram;
  }
  return textual;
}

std::vector<int> anchor_nodes(const DependencyTree& tree, const Tokens& question, const Tokens& candidate) {
  std::set<std::string> words(question.begin(), question.end());
  words.insert(candidate.begin(), candidate.end());
  std::vector<int> out;
  for (const auto& n : tree.nodes)
    if (words.count(n.token)) out.push_back(n.index);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> normalize_adjacency(const std::vector<double>& raw, std::size_t k) {
  std::vector<double> degree(k, 1.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) degree[i] += raw[i * k + j];
  std::vector<double> out(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double a = raw[i * k + j] + (i == j ? 1.0 : 0.0);
      if (a != 0.0) out[i * k + j] = a / std::sqrt(degree[i] * degree[j]);
    }
  return out;
}

namespace {

void finish(ContextGraph& g) {
  const auto k = g.size();
  std::vector<double> raw(k * k, 0.0);
  for (const auto& e : g.edges) {
    if (e.a == e.b) continue;
    raw[static_cast<std::size_t>(e.a) * k + static_cast<std::size_t>(e.b)] = 1.0;
    raw[static_cast<std::size_t>(e.b) * k + static_cast<std::size_t>(e.a)] = 1.0;
  }
  g.adjacency = normalize_adjacency(raw, k);
}

}  // namespace

ContextGraph build_textual_graph(const DependencyTree& tree, const std::vector<int>& anchors, int cap,
                                 bool relation_nodes) {
  ContextGraph g;
  g.kind = GraphKind::Textual;
  const auto n = tree.nodes.size();
  if (n == 0) return g;
  cap = std::max(cap, 1);

  std::vector<bool> kept(n, false), edge_kept(tree.edges.size(), false);
  for (int a : anchors) kept[static_cast<std::size_t>(a)] = true;
  if (anchors.empty()) kept[0] = true;
  for (int round = 0; round < 2 && !anchors.empty(); ++round) {
    const auto frontier = kept;
    for (std::size_t e = 0; e < tree.edges.size(); ++e) {
      const auto h = static_cast<std::size_t>(tree.edges[e].head);
      const auto d = static_cast<std::size_t>(tree.edges[e].dependent);
      if (frontier[h] || frontier[d]) {
        edge_kept[e] = true;
        kept[h] = kept[d] = true;
      }
    }
  }

  std::vector<int> chosen;
  for (std::size_t i = 0; i < n; ++i)
    if (kept[i]) chosen.push_back(static_cast<int>(i));
  if (static_cast<int>(chosen.size()) > cap) {
    constexpr int kFar = std::numeric_limits<int>::max();
    std::vector<int> dist(n, kFar);
    std::deque<int> queue;
    for (int a : anchors) {
      dist[static_cast<std::size_t>(a)] = 0;
      queue.push_back(a);
    }
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (std::size_t e = 0; e < tree.edges.size(); ++e) {
        if (!edge_kept[e]) continue;
        int w = -1;
        if (tree.edges[e].head == v) w = tree.edges[e].dependent;
        if (tree.edges[e].dependent == v) w = tree.edges[e].head;
        if (w >= 0 && dist[static_cast<std::size_t>(w)] == kFar) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(w);
        }
      }
    }
    std::stable_sort(chosen.begin(), chosen.end(),
                     [&](int a, int b) { return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)]; });
    chosen.resize(static_cast<std::size_t>(cap));
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<int> local(n, -1);
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const auto src = static_cast<std::size_t>(chosen[i]);
    local[src] = static_cast<int>(i);
    g.node_tokens.push_back(tree.nodes[src].token);
    g.node_words.push_back({tree.nodes[src].token});
    g.source_index.push_back(chosen[i]);
  }
  for (std::size_t e = 0; e < tree.edges.size(); ++e) {
    if (!edge_kept[e]) continue;
    const int a = local[static_cast<std::size_t>(tree.edges[e].head)];
    const int b = local[static_cast<std::size_t>(tree.edges[e].dependent)];
    if (a < 0 || b < 0) continue;
    if (relation_nodes && static_cast<int>(g.size()) < cap) {
      const int r = static_cast<int>(g.size());
      g.node_tokens.push_back(tree.edges[e].relation);
      g.node_words.push_back({tree.edges[e].relation});
      g.source_index.push_back(-1);
      g.edges.push_back({a, r, tree.edges[e].relation});
      g.edges.push_back({r, b, tree.edges[e].relation});
    } else {
      g.edges.push_back({a, b, tree.edges[e].relation});
    }
  }
  finish(g);
  return g;
}

ContextGraph build_diagram_graph(const DiagramGraph& dg, int cap, GraphKind kind) {
  ContextGraph g;
  g.kind = kind;
  const auto keep = std::min(dg.entities.size(), static_cast<std::size_t>(std::max(cap, 0)));
  for (std::size_t i = 0; i < keep; ++i) {
    const auto& words = dg.entities[i].name_tokens;
    std::string joined;
    for (const auto& w : words) joined += (joined.empty() ? "" : " ") + w;
    g.node_tokens.push_back(joined);
    g.node_words.push_back(words);
    g.source_index.push_back(dg.entities[i].index);
  }
  for (const auto& [a, b] : dg.relations)
    if (a < static_cast<int>(keep) && b < static_cast<int>(keep)) g.edges.push_back({a, b, ""});
  finish(g);
  return g;
}

NounHint noun_hint(const Tokens& question) {
  for (const auto& t : question)
    if (t == "stage" || t == "stages") return NounHint::Stages;
  return NounHint::Objects;
}

Tokens count_sentence(const DiagramGraph& dg, NounHint hint) {
  return {"there", "are", std::to_string(dg.entity_count), hint == NounHint::Stages ? "stages" : "objects"};
}

std::optional<std::size_t> select_visual_context(const Lesson& lesson, const Tokens& query) {
  const std::set<std::string> words(query.begin(), query.end());
  std::optional<std::size_t> best;
  std::size_t best_overlap = 0;
  for (std::size_t d = 0; d < lesson.diagrams.size(); ++d) {
    std::set<std::string> entity_words;
    for (const auto& e : lesson.diagrams[d].entities) entity_words.insert(e.name_tokens.begin(), e.name_tokens.end());
    std::size_t overlap = 0;
    for (const auto& w : entity_words) overlap += words.count(w);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = d;
    }
  }
  return best;
}

nlohmann::json graph_to_json(const ContextGraph& graph) {
  nlohmann::json adjacency = nlohmann::json::array();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < graph.size(); ++j) row.push_back(graph.adj(i, j));
    adjacency.push_back(row);
  }
  nlohmann::json relations = nlohmann::json::array();
  for (const auto& e : graph.edges) relations.push_back({e.a, e.b, e.relation});
  return {{"node_tokens", graph.node_tokens},
          {"adjacency_dense", adjacency},
          {"kind", to_string(graph.kind)},
          {"relations", relations}};
}

}  // namespace tqa

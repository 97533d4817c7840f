#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tqa/corpus.hpp"

namespace tqa {

enum class GraphKind { Textual, VisualContext, QuestionDiagram };

std::string to_string(GraphKind kind);

struct GraphCaps {
  int textual = 75;
  int visual = 35;
  int question_diagram = 25;

  int for_kind(GraphKind kind) const;
};

struct GraphEdge {
  int a = 0;
  int b = 0;
  std::string relation;
  bool operator==(const GraphEdge&) const = default;
};

// Node features are built from node_words (one word for dependency nodes,
// the entity name for diagram nodes); node_tokens holds the display form.
struct ContextGraph {
  GraphKind kind = GraphKind::Textual;
  Tokens node_tokens;
  std::vector<Tokens> node_words;
  // Paragraph token position or entity index of each node; -1 for
  // relation nodes.
  std::vector<int> source_index;
  std::vector<GraphEdge> edges;
  // Row-major K x K, normalized.
  std::vector<double> adjacency;

  std::size_t size() const { return node_tokens.size(); }
  double adj(std::size_t i, std::size_t j) const { return adjacency[i * size() + j]; }
  bool operator==(const ContextGraph&) const = default;
};

// Sorted indices of tree nodes whose token occurs in question or candidate.
std::vector<int> anchor_nodes(const DependencyTree& tree, const Tokens& question, const Tokens& candidate);

// Two rounds of edge-unit expansion from the anchors. Anchors are always
// kept; an empty anchor set yields the first token alone. Over the cap,
// nodes are kept by BFS distance from the anchors, then by position. With
// relation_nodes each kept edge is routed through a node labelled with its
// relation while room remains under the cap.
ContextGraph build_textual_graph(const DependencyTree& tree, const std::vector<int>& anchors, int cap,
                                 bool relation_nodes = false);

// One node per entity, edges from relations, lowest indices kept.
ContextGraph build_diagram_graph(const DiagramGraph& dg, int cap, GraphKind kind = GraphKind::VisualContext);

enum class NounHint { Objects, Stages };

NounHint noun_hint(const Tokens& question);
Tokens count_sentence(const DiagramGraph& dg, NounHint hint);

// D^-1/2 (raw + I) D^-1/2 for a symmetric 0/1 matrix with zero diagonal.
std::vector<double> normalize_adjacency(const std::vector<double>& raw, std::size_t k);

// Lesson diagram sharing the most entity tokens with the query, ties to the
// lowest index; none when the lesson has no diagram or nothing overlaps.
std::optional<std::size_t> select_visual_context(const Lesson& lesson, const Tokens& query);

nlohmann::json graph_to_json(const ContextGraph& graph);

}  // namespace tqa

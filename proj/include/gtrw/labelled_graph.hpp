#ifndef GTRW_LABELLED_GRAPH_HPP
#define GTRW_LABELLED_GRAPH_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gtrw/error.hpp"

namespace gtrw {

// A finite labelled graph: named nodes, named actions, labelled edges.
// Node and action ids are indices into the name vectors.
class FiniteLabelledGraph {
  public:
    FiniteLabelledGraph() = default;

    int add_node(const std::string& name);
    int add_action(const std::string& name);
    void add_edge(int src, int action, int dst);
    void add_edge(const std::string& src, const std::string& action,
                  const std::string& dst);

    int node_id(const std::string& name) const;     // -1 when absent
    int action_id(const std::string& name) const;   // -1 when absent
    int node_count() const { return static_cast<int>(node_names_.size()); }
    int action_count() const { return static_cast<int>(action_names_.size()); }
    const std::vector<std::string>& node_names() const { return node_names_; }
    const std::vector<std::string>& action_names() const { return action_names_; }

    bool has_edge(int src, int action, int dst) const;
    const std::vector<std::pair<int, int>>& out(int src) const {  // (action, dst)
        return out_[src];
    }
    const std::set<std::tuple<int, int, int>>& edges() const { return edges_; }

    // Adjacency restricted to one action.
    std::vector<int> successors(int src, int action) const;
    std::vector<int> predecessors(int dst, int action) const;

  private:
    std::vector<std::string> node_names_;
    std::vector<std::string> action_names_;
    std::map<std::string, int> node_index_;
    std::map<std::string, int> action_index_;
    std::set<std::tuple<int, int, int>> edges_;  // (src, action, dst)
    std::vector<std::vector<std::pair<int, int>>> out_;
    std::vector<std::vector<std::pair<int, int>>> in_;
};

// Text format: `nodes: a b c`, then `a -e-> b` lines; '#' comments.
FiniteLabelledGraph parse_graph(const std::string& text);
std::string to_string(const FiniteLabelledGraph& g);

}  // namespace gtrw

#endif

#pragma once

// Network model: directed topology with per-edge wavelength capacities, the
// declared source-destination lightpaths, wiretap edge sets, and the scenario
// file format.
//
// Scenario file (.cfg), '#' starts a comment:
//
//   [scenario]
//   name = nsfnet
//   source = 0
//   destination = 5
//   [nodes]
//   0 1 2 3 4 5
//   [edges]
//   2-5 6            # tail-head capacity
//   [paths]
//   0-2-5 2 0.80     # node route, delay, availability
//   [attack]
//   eavesdrop = 2-5 8-9
//   jam =

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lncsec/error.hpp"

namespace lncsec {

using node_id = std::uint32_t;

struct edge_key {
  node_id tail = 0;
  node_id head = 0;
  auto operator<=>(const edge_key&) const = default;
  std::string str() const { return std::to_string(tail) + "-" + std::to_string(head); }
};

using edge_set = std::set<edge_key>;

struct edge {
  edge_key key;
  std::uint32_t capacity = 1;  ///< parallel wavelengths
};

/// One wavelength of an edge.
struct link {
  edge_key edge;
  std::uint32_t wavelength = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::vector<node_id> parse_route(std::string_view s) {
  std::vector<node_id> nodes;
  std::size_t start = 0;
  while (true) {
    const auto dash = s.find('-', start);
    const auto token = s.substr(start, dash == std::string_view::npos ? s.npos : dash - start);
    node_id v = 0;
    if (!parse_number(token, v)) return {};
    nodes.push_back(v);
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  return nodes;
}

}  // namespace detail

/// Parses "tail-head". Throws precondition_error on malformed text.
inline edge_key parse_edge_key(std::string_view text) {
  const auto nodes = detail::parse_route(detail::trim(text));
  if (nodes.size() != 2) {
    throw precondition_error("malformed edge '" + std::string(text) + "', expected tail-head");
  }
  return {nodes[0], nodes[1]};
}

class topology {
public:
  topology() = default;

  topology(std::vector<node_id> nodes, std::vector<edge> edges, node_id source, node_id destination)
      : nodes_(std::move(nodes)), source_(source), destination_(destination) {
    std::sort(nodes_.begin(), nodes_.end());
    if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
      throw load_error("duplicate node id");
    }
    if (source_ == destination_) throw load_error("source and destination coincide");
    if (!has_node(source_)) throw load_error("source " + std::to_string(source_) + " is not a node");
    if (!has_node(destination_)) {
      throw load_error("destination " + std::to_string(destination_) + " is not a node");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) add_edge(edges[i], i);
  }

  const std::vector<node_id>& nodes() const noexcept { return nodes_; }
  node_id source() const noexcept { return source_; }
  node_id destination() const noexcept { return destination_; }

  std::vector<edge> edges() const {
    std::vector<edge> out;
    out.reserve(edges_.size());
    for (const auto& [key, cap] : edges_) out.push_back({key, cap});
    return out;
  }

  bool has_node(node_id v) const { return std::binary_search(nodes_.begin(), nodes_.end(), v); }
  bool contains(const edge_key& e) const { return edges_.count(e) != 0; }

  std::uint32_t capacity(const edge_key& e) const {
    const auto it = edges_.find(e);
    if (it == edges_.end()) throw precondition_error("unknown edge " + e.str());
    return it->second;
  }

  /// Total wavelengths over a set of edges.
  std::uint64_t capacity(const edge_set& edges) const {
    std::uint64_t total = 0;
    for (const auto& e : edges) total += capacity(e);
    return total;
  }

private:
  void add_edge(const edge& e, std::size_t index) {
    const std::string where = "edges[" + std::to_string(index) + "]";
    if (!has_node(e.key.tail) || !has_node(e.key.head)) {
      throw load_error(where + ": edge " + e.key.str() + " references an unknown node");
    }
    if (e.key.tail == e.key.head) throw load_error(where + ": self-loop " + e.key.str());
    if (e.capacity < 1) throw load_error(where + ".capacity: must be >= 1");
    if (!edges_.emplace(e.key, e.capacity).second) {
      throw load_error(where + ": duplicate edge " + e.key.str());
    }
  }

  std::vector<node_id> nodes_;
  std::map<edge_key, std::uint32_t> edges_;
  node_id source_ = 0;
  node_id destination_ = 0;
};

struct path {
  std::size_t id = 0;
  std::vector<edge_key> edges;
  double delay = 1.0;
  double availability = 1.0;

  std::vector<node_id> route() const {
    std::vector<node_id> nodes;
    if (edges.empty()) return nodes;
    nodes.push_back(edges.front().tail);
    for (const auto& e : edges) nodes.push_back(e.head);
    return nodes;
  }

  bool traverses(const edge_key& e) const {
    return std::find(edges.begin(), edges.end(), e) != edges.end();
  }
};

inline path make_path(std::size_t id, const std::vector<node_id>& route, double delay,
                      double availability) {
  path p{id, {}, delay, availability};
  for (std::size_t i = 0; i + 1 < route.size(); ++i) p.edges.push_back({route[i], route[i + 1]});
  return p;
}

/// Candidate paths ordered by ascending delay, ties by ascending id.
class path_table {
public:
  path_table() = default;

  explicit path_table(std::vector<path> paths) : paths_(std::move(paths)) {
    std::stable_sort(paths_.begin(), paths_.end(), [](const path& a, const path& b) {
      return a.delay < b.delay || (a.delay == b.delay && a.id < b.id);
    });
    std::set<std::size_t> ids;
    for (const auto& p : paths_) {
      if (!ids.insert(p.id).second) throw load_error("duplicate path id " + std::to_string(p.id));
    }
  }

  std::size_t size() const noexcept { return paths_.size(); }
  bool empty() const noexcept { return paths_.empty(); }
  const path& operator[](std::size_t pos) const { return paths_[pos]; }
  auto begin() const noexcept { return paths_.begin(); }
  auto end() const noexcept { return paths_.end(); }

  std::vector<double> availabilities() const {
    std::vector<double> p;
    p.reserve(paths_.size());
    for (const auto& x : paths_) p.push_back(x.availability);
    return p;
  }

  std::vector<double> delays() const {
    std::vector<double> d;
    d.reserve(paths_.size());
    for (const auto& x : paths_) d.push_back(x.delay);
    return d;
  }

private:
  std::vector<path> paths_;
};

struct attack_scenario {
  edge_set eavesdrop;
  edge_set jam;

  /// eavesdrop ∪ jam, in edge order.
  edge_set all() const {
    edge_set u = eavesdrop;
    u.insert(jam.begin(), jam.end());
    return u;
  }
};

struct scenario {
  std::string name;
  topology topo;
  path_table paths;
  attack_scenario attack;
};

/// 1 iff the link's edge lies on the path. Every wavelength of a traversed
/// edge counts, since an attacker on an edge sees all of its wavelengths.
inline bool link_on_path(const topology& topo, const link& l, const path& p) {
  const auto cap = topo.capacity(l.edge);
  if (l.wavelength >= cap) {
    throw precondition_error("wavelength " + std::to_string(l.wavelength) + " out of range on edge " +
                             l.edge.str());
  }
  return p.traverses(l.edge);
}

/// Q function: a path counts once however many wiretap edges it crosses.
inline bool path_is_wiretapped(const path& p, const edge_set& wiretap) {
  return std::any_of(p.edges.begin(), p.edges.end(),
                     [&](const edge_key& e) { return wiretap.count(e) != 0; });
}

/// Bit l set iff table position l is a wiretap path. Needs at most 64 paths.
inline std::uint64_t wiretap_mask(const path_table& paths, const edge_set& wiretap) {
  if (paths.size() > 64) throw precondition_error("wiretap_mask supports at most 64 paths");
  std::uint64_t mask = 0;
  for (std::size_t l = 0; l < paths.size(); ++l) {
    if (path_is_wiretapped(paths[l], wiretap)) mask |= std::uint64_t{1} << l;
  }
  return mask;
}

/// Edmonds-Karp max-flow from source to destination, capacities in wavelengths.
inline std::uint64_t max_flow(const topology& topo) {
  const auto& nodes = topo.nodes();
  const std::size_t n = nodes.size();
  auto index = [&](node_id v) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), v) - nodes.begin());
  };
  std::vector<std::vector<std::uint64_t>> residual(n, std::vector<std::uint64_t>(n, 0));
  for (const auto& e : topo.edges()) residual[index(e.key.tail)][index(e.key.head)] += e.capacity;

  const std::size_t s = index(topo.source());
  const std::size_t t = index(topo.destination());
  std::uint64_t flow = 0;
  while (true) {
    std::vector<std::size_t> parent(n, n);
    parent[s] = s;
    std::deque<std::size_t> queue{s};
    while (!queue.empty() && parent[t] == n) {
      const auto u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < n; ++v) {
        if (parent[v] == n && residual[u][v] > 0) {
          parent[v] = u;
          queue.push_back(v);
        }
      }
    }
    if (parent[t] == n) return flow;
    std::uint64_t bottleneck = std::numeric_limits<std::uint64_t>::max();
    for (auto v = t; v != s; v = parent[v]) bottleneck = std::min(bottleneck, residual[parent[v]][v]);
    for (auto v = t; v != s; v = parent[v]) {
      residual[parent[v]][v] -= bottleneck;
      residual[v][parent[v]] += bottleneck;
    }
    flow += bottleneck;
  }
}

inline bool min_cut_check(const topology& topo, std::size_t required_paths) {
  return max_flow(topo) >= required_paths;
}

/// Checks that each declared path is a loop-free source-to-destination route
/// over existing edges with delay > 0 and availability in [0, 1].
inline void check_path(const topology& topo, const path& p, const std::string& where) {
  if (p.edges.empty()) throw load_error(where + ".route: empty");
  if (p.edges.front().tail != topo.source()) {
    throw load_error(where + ".route: does not start at source " + std::to_string(topo.source()));
  }
  if (p.edges.back().head != topo.destination()) {
    throw load_error(where + ".route: does not end at destination " +
                     std::to_string(topo.destination()));
  }
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    if (i > 0 && p.edges[i].tail != p.edges[i - 1].head) {
      throw load_error(where + ".route: not connected at hop " + std::to_string(i));
    }
    if (!topo.contains(p.edges[i])) {
      throw load_error(where + ".route: missing edge " + p.edges[i].str());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (p.edges[j].tail == p.edges[i].head) {
        throw load_error(where + ".route: revisits node " + std::to_string(p.edges[i].head));
      }
    }
  }
  if (!(p.delay > 0.0)) throw load_error(where + ".delay: must be > 0");
  if (!(p.availability >= 0.0 && p.availability <= 1.0)) {
    throw load_error(where + ".availability: " + detail::format_double(p.availability) +
                     " not in [0, 1]");
  }
}

inline void check_attack(const topology& topo, const attack_scenario& attack) {
  for (const auto& e : attack.eavesdrop) {
    if (!topo.contains(e)) throw load_error("attack.eavesdrop: unknown edge " + e.str());
  }
  for (const auto& e : attack.jam) {
    if (!topo.contains(e)) throw load_error("attack.jam: unknown edge " + e.str());
    if (attack.eavesdrop.count(e) != 0) {
      throw load_error("attack: edge " + e.str() + " is both eavesdropped and jammed");
    }
  }
}

/// Builds a validated scenario. Paths are sorted by delay on the way in.
inline scenario make_scenario(std::string name, topology topo, std::vector<path> paths,
                              attack_scenario attack) {
  for (std::size_t i = 0; i < paths.size(); ++i) {
    check_path(topo, paths[i], "paths[" + std::to_string(i) + "]");
  }
  if (paths.empty()) throw load_error("paths: no paths declared");
  check_attack(topo, attack);
  return scenario{std::move(name), std::move(topo), path_table(std::move(paths)), std::move(attack)};
}

inline scenario load_scenario(std::istream& in) {
  enum class section { none, scenario, nodes, edges, paths, attack };
  section current = section::none;
  std::map<std::string, std::pair<std::string, std::size_t>> header;  // key -> value, line
  std::set<std::string> seen_sections;
  std::vector<node_id> nodes;
  std::vector<edge> edges;
  std::vector<path> paths;
  std::vector<std::size_t> path_lines;
  std::vector<std::size_t> edge_lines;
  attack_scenario attack;

  auto parse_edge_list = [](std::string_view value, std::size_t line) {
    edge_set out;
    for (auto tok : detail::split_ws(value)) {
      try {
        out.insert(parse_edge_key(tok));
      } catch (const precondition_error& e) {
        throw load_error(e.what(), line);
      }
    }
    return out;
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw load_error("unterminated section header", line_no);
      const std::string name(detail::trim(line.substr(1, line.size() - 2)));
      if (!seen_sections.insert(name).second) throw load_error("repeated section [" + name + "]", line_no);
      if (name == "scenario") current = section::scenario;
      else if (name == "nodes") current = section::nodes;
      else if (name == "edges") current = section::edges;
      else if (name == "paths") current = section::paths;
      else if (name == "attack") current = section::attack;
      else throw load_error("unknown section [" + name + "]", line_no);
      continue;
    }

    switch (current) {
      case section::none:
        throw load_error("content before the first section", line_no);
      case section::scenario:
      case section::attack: {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw load_error("expected key = value", line_no);
        const std::string key(detail::trim(line.substr(0, eq)));
        const auto value = detail::trim(line.substr(eq + 1));
        if (current == section::scenario) {
          if (key != "name" && key != "source" && key != "destination") {
            throw load_error("unknown key scenario." + key, line_no);
          }
          header[key] = {std::string(value), line_no};
        } else if (key == "eavesdrop") {
          attack.eavesdrop = parse_edge_list(value, line_no);
        } else if (key == "jam") {
          attack.jam = parse_edge_list(value, line_no);
        } else {
          throw load_error("unknown key attack." + key, line_no);
        }
        break;
      }
      case section::nodes:
        for (auto tok : detail::split_ws(line)) {
          node_id v = 0;
          if (!detail::parse_number(tok, v)) {
            throw load_error("nodes: bad node id '" + std::string(tok) + "'", line_no);
          }
          nodes.push_back(v);
        }
        break;
      case section::edges: {
        const auto toks = detail::split_ws(line);
        const std::string where = "edges[" + std::to_string(edges.size()) + "]";
        if (toks.size() != 2) throw load_error(where + ": expected 'tail-head capacity'", line_no);
        edge e;
        try {
          e.key = parse_edge_key(toks[0]);
        } catch (const precondition_error& err) {
          throw load_error(where + ": " + err.what(), line_no);
        }
        if (!detail::parse_number(toks[1], e.capacity)) {
          throw load_error(where + ".capacity: not an integer", line_no);
        }
        edges.push_back(e);
        edge_lines.push_back(line_no);
        break;
      }
      case section::paths: {
        const auto toks = detail::split_ws(line);
        const std::string where = "paths[" + std::to_string(paths.size()) + "]";
        if (toks.size() != 3) throw load_error(where + ": expected 'route delay availability'", line_no);
        const auto route = detail::parse_route(toks[0]);
        if (route.size() < 2) throw load_error(where + ".route: malformed", line_no);
        double delay = 0;
        double avail = 0;
        if (!detail::parse_number(toks[1], delay)) throw load_error(where + ".delay: not a number", line_no);
        if (!detail::parse_number(toks[2], avail)) {
          throw load_error(where + ".availability: not a number", line_no);
        }
        paths.push_back(make_path(paths.size(), route, delay, avail));
        path_lines.push_back(line_no);
        break;
      }
    }
  }

  auto header_node = [&](const std::string& key) {
    const auto it = header.find(key);
    if (it == header.end()) throw load_error("scenario." + key + " missing");
    node_id v = 0;
    if (!detail::parse_number(std::string_view(it->second.first), v)) {
      throw load_error("scenario." + key + ": not a node id", it->second.second);
    }
    return v;
  };

  const std::string name = header.count("name") ? header["name"].first : std::string("unnamed");
  const node_id s = header_node("source");
  const node_id d = header_node("destination");

  topology topo;
  try {
    topo = topology(nodes, edges, s, d);
  } catch (const load_error& e) {
    // Point at the offending edge line where possible.
    const std::string msg = e.what();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (msg.rfind("edges[" + std::to_string(i) + "]", 0) == 0) throw load_error(msg, edge_lines[i]);
    }
    throw;
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    try {
      check_path(topo, paths[i], "paths[" + std::to_string(i) + "]");
    } catch (const load_error& e) {
      throw load_error(e.what(), path_lines[i]);
    }
  }
  return make_scenario(name, std::move(topo), std::move(paths), std::move(attack));
}

inline scenario load_scenario_text(const std::string& text) {
  std::istringstream in(text);
  return load_scenario(in);
}

inline scenario load_scenario_file(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw load_error("cannot open scenario file '" + filename + "'");
  return load_scenario(in);
}

/// Writes a scenario in the .cfg format; paths are emitted in id order so a
/// reload reproduces the same ids.
inline std::string save_scenario(const scenario& sc) {
  std::ostringstream out;
  out << "[scenario]\n"
      << "name = " << sc.name << "\n"
      << "source = " << sc.topo.source() << "\n"
      << "destination = " << sc.topo.destination() << "\n\n[nodes]\n";
  for (std::size_t i = 0; i < sc.topo.nodes().size(); ++i) {
    out << (i ? " " : "") << sc.topo.nodes()[i];
  }
  out << "\n\n[edges]\n";
  for (const auto& e : sc.topo.edges()) out << e.key.str() << " " << e.capacity << "\n";
  out << "\n[paths]\n";
  std::vector<const path*> by_id;
  for (const auto& p : sc.paths) by_id.push_back(&p);
  std::sort(by_id.begin(), by_id.end(), [](const path* a, const path* b) { return a->id < b->id; });
  for (const auto* p : by_id) {
    const auto route = p->route();
    for (std::size_t i = 0; i < route.size(); ++i) out << (i ? "-" : "") << route[i];
    out << " " << detail::format_double(p->delay) << " " << detail::format_double(p->availability) << "\n";
  }
  auto list = [](const edge_set& edges) {
    std::string s;
    for (const auto& e : edges) s += " " + e.str();
    return s;
  };
  out << "\n[attack]\neavesdrop =" << list(sc.attack.eavesdrop) << "\njam =" << list(sc.attack.jam)
      << "\n";
  return out.str();
}

}  // namespace lncsec

#include "hri/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hri/random.hpp"

namespace hri {

namespace {

using Graph = std::vector<std::vector<char>>;

std::vector<std::string> numbered_constants(int n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

std::string c(int i) { return std::to_string(i); }

GroundAtom atom(const std::string& pred, int a) { return {pred, {c(a)}}; }
GroundAtom atom(const std::string& pred, int a, int b) { return {pred, {c(a), c(b)}}; }

PredicateSymbol input(const std::string& name, int arity) { return {name, arity, PredicateKind::input}; }

std::vector<PredicateSymbol> with_truth(std::vector<PredicateSymbol> preds) {
  preds.insert(preds.begin(), {true_symbol(), false_symbol()});
  return preds;
}

// Ground truth for a target relation over integer constants.
using UnaryTruth = std::function<bool(int)>;
using BinaryTruth = std::function<bool(int, int)>;

void label_unary(IlpTask& task, int n, const UnaryTruth& truth) {
  for (int x = 0; x < n; ++x) (truth(x) ? task.positives : task.negatives).insert(atom("target", x));
}

void label_binary(IlpTask& task, int n, const BinaryTruth& truth) {
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) (truth(x, y) ? task.positives : task.negatives).insert(atom("target", x, y));
}

Graph relation(const FactSet& background, const std::string& pred, int n) {
  Graph g(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (const auto& a : background) {
    if (a.predicate != pred || a.args.size() != 2) continue;
    g[std::stoul(a.args[0])][std::stoul(a.args[1])] = 1;
  }
  return g;
}

std::vector<char> unary_relation(const FactSet& background, const std::string& pred, int n) {
  std::vector<char> v(static_cast<std::size_t>(n), 0);
  for (const auto& a : background)
    if (a.predicate == pred && a.args.size() == 1) v[std::stoul(a.args[0])] = 1;
  return v;
}

// Transitive closure (paths of length >= 1).
Graph closure(Graph g) {
  const auto n = g.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (g[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (g[k][j]) g[i][j] = 1;
  return g;
}

Graph random_digraph(Rng& rng, int nodes, double p) {
  Graph g(static_cast<std::size_t>(nodes), std::vector<char>(static_cast<std::size_t>(nodes), 0));
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j)
      if (i != j && rng.bernoulli(p)) g[i][j] = 1;
  return g;
}

void add_relation(FactSet& bg, const std::string& pred, const Graph& g) {
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g[i][j]) bg.insert(atom(pred, static_cast<int>(i), static_cast<int>(j)));
}

void add_numbers(FactSet& bg, int n) {
  bg.insert(atom("zero", 0));
  for (int i = 0; i + 1 < n; ++i) bg.insert(atom("succ", i, i + 1));
}

// --- Labelling: ground truth computed directly from the background. ---------

using Labeller = std::function<void(IlpTask&)>;

struct TaskInfo {
  TaskDefaults defaults;
  std::vector<PredicateSymbol> inputs;
  int target_arity;
  Labeller label;
  std::function<FactSet(Rng&, int)> background;
};

int count_n(const IlpTask& t) { return static_cast<int>(t.constants.size()); }

const std::map<std::string, TaskInfo>& registry() {
  static const std::map<std::string, TaskInfo> tasks = [] {
    std::map<std::string, TaskInfo> r;
    const auto numbers = with_truth({input("zero", 1), input("succ", 2)});
    const auto numbers_bg = [](Rng&, int n) {
      FactSet bg;
      add_numbers(bg, n);
      return bg;
    };

    r["predecessor"] = {{4, 2, 4, 10, 14, 2, true}, numbers, 2,
                        [](IlpTask& t) { label_binary(t, count_n(t), [](int x, int y) { return x == y + 1; }); },
                        numbers_bg};
    r["less_than"] = {{4, 12, 12, 10, 12, 2, true}, numbers, 2,
                      [](IlpTask& t) { label_binary(t, count_n(t), [](int x, int y) { return x < y; }); },
                      numbers_bg};
    const auto even = [](IlpTask& t) { label_unary(t, count_n(t), [](int x) { return x % 2 == 0; }); };
    r["even_odd"] = {{4, 6, 8, 11, 15, 2, true}, numbers, 1, even, numbers_bg};
    r["even_succ2"] = {{4, 6, 8, 11, 15, 2, true}, numbers, 1, even, numbers_bg};
    r["fizz"] = {{4, 8, 10, 11, 16, 3, true}, numbers, 1,
                 [](IlpTask& t) { label_unary(t, count_n(t), [](int x) { return x % 3 == 0; }); }, numbers_bg};
    r["buzz"] = {{4, 8, 10, 11, 16, 5, true},
                 with_truth({input("zero", 1), input("succ", 2), input("pred1", 2), input("pred2", 2)}),
                 1,
                 [](IlpTask& t) { label_unary(t, count_n(t), [](int x) { return x % 5 == 0; }); },
                 [](Rng&, int n) {
                   FactSet bg;
                   add_numbers(bg, n);
                   for (int i = 0; i + 3 < n; ++i) bg.insert(atom("pred1", i, i + 3));
                   for (int i = 0; i + 2 < n; ++i) bg.insert(atom("pred2", i, i + 2));
                   return bg;
                 }};

    const auto edges_only = with_truth({input("edge", 2)});
    r["undirected_edge"] = {{4, 2, 2, 4, 6, 2, false}, edges_only, 2,
                            [](IlpTask& t) {
                              const auto e = relation(t.background, "edge", count_n(t));
                              label_binary(t, count_n(t), [&](int x, int y) { return e[x][y] || e[y][x]; });
                            },
                            [](Rng& rng, int n) {
                              FactSet bg;
                              add_relation(bg, "edge", random_digraph(rng, n, std::min(0.5, 1.5 / (n - 1))));
                              return bg;
                            }};
    r["connectedness"] = {{4, 4, 4, 5, 5, 2, false}, edges_only, 2,
                          [](IlpTask& t) {
                            const auto reach = closure(relation(t.background, "edge", count_n(t)));
                            label_binary(t, count_n(t), [&](int x, int y) { return reach[x][y] != 0; });
                          },
                          [](Rng& rng, int n) {
                            FactSet bg;
                            add_relation(bg, "edge", random_digraph(rng, n, std::min(0.5, 1.0 / (n - 1))));
                            return bg;
                          }};
    r["cyclic"] = {{4, 4, 4, 6, 7, 2, false}, edges_only, 1,
                   [](IlpTask& t) {
                     const auto reach = closure(relation(t.background, "edge", count_n(t)));
                     label_unary(t, count_n(t), [&](int x) { return reach[x][x] != 0; });
                   },
                   [](Rng& rng, int n) {
                     FactSet bg;
                     add_relation(bg, "edge", random_digraph(rng, n, std::min(0.5, 1.2 / (n - 1))));
                     return bg;
                   }};
    r["two_children"] = {{4, 4, 5, 5, 7, 3, false}, with_truth({input("edge", 2), input("neq", 2)}), 1,
                         [](IlpTask& t) {
                           const auto e = relation(t.background, "edge", count_n(t));
                           label_unary(t, count_n(t), [&](int x) {
                             return std::count(e[x].begin(), e[x].end(), 1) >= 2;
                           });
                         },
                         [](Rng& rng, int n) {
                           FactSet bg;
                           Graph g(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
                           for (int x = 0; x < n; ++x) {
                             const int degree = std::min(static_cast<int>(rng.uniform_int(3)), n - 1);
                             auto others = rng.permutation(n);
                             others.erase(std::remove(others.begin(), others.end(), x), others.end());
                             for (int k = 0; k < degree; ++k) g[x][others[k]] = 1;
                           }
                           add_relation(bg, "edge", g);
                           for (int x = 0; x < n; ++x)
                             for (int y = 0; y < n; ++y)
                               if (x != y) bg.insert(atom("neq", x, y));
                           return bg;
                         }};

    // Coloured graphs: the last two constants are colours, the second to last
    // one is red.
    const auto coloured_graph = [](Rng& rng, int n, double degree, bool mark_red) {
      FactSet bg;
      const int nodes = n - 2;
      add_relation(bg, "edge", [&] {
        Graph g = random_digraph(rng, nodes, std::min(0.6, degree / std::max(1, nodes - 1)));
        for (auto& row : g) row.resize(static_cast<std::size_t>(n), 0);
        g.resize(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
        return g;
      }());
      for (int x = 0; x < nodes; ++x) bg.insert(atom("colour", x, n - 2 + static_cast<int>(rng.uniform_int(2))));
      if (mark_red) bg.insert(atom("red", n - 2));
      return bg;
    };
    r["adjacent_to_red"] = {{4, 4, 4, 7, 9, 4, false},
                            with_truth({input("edge", 2), input("colour", 2), input("red", 1)}),
                            1,
                            [](IlpTask& t) {
                              const int n = count_n(t);
                              const auto e = relation(t.background, "edge", n);
                              const auto col = relation(t.background, "colour", n);
                              const auto red = unary_relation(t.background, "red", n);
                              label_unary(t, n, [&](int x) {
                                for (int z = 0; z < n; ++z)
                                  for (int k = 0; k < n; ++k)
                                    if (e[z][x] && col[z][k] && red[k]) return true;
                                return false;
                              });
                            },
                            [coloured_graph](Rng& rng, int n) { return coloured_graph(rng, n, 1.0, true); }};
    r["graph_coloring"] = {{4, 4, 4, 8, 10, 4, false}, with_truth({input("edge", 2), input("colour", 2)}), 2,
                           [](IlpTask& t) {
                             const int n = count_n(t);
                             const auto e = relation(t.background, "edge", n);
                             const auto col = relation(t.background, "colour", n);
                             label_binary(t, n, [&](int x, int y) {
                               if (!e[x][y]) return false;
                               for (int k = 0; k < n; ++k)
                                 if (col[x][k] && col[y][k]) return true;
                               return false;
                             });
                           },
                           [coloured_graph](Rng& rng, int n) { return coloured_graph(rng, n, 1.5, false); }};

    // Linked lists: node 0 is the null node; cons(X,Y) iff Y is the node
    // after X; value(X,Y) iff Y is the value held by node X.
    const auto random_list = [](Rng& rng, int n) {
      auto order = rng.permutation(n - 1);
      for (auto& v : order) ++v;
      return order;  // head first
    };
    r["member"] = {{4, 12, 12, 5, 7, 3, false}, with_truth({input("cons", 2), input("value", 2)}), 2,
                   [](IlpTask& t) {
                     const int n = count_n(t);
                     const auto next = relation(t.background, "cons", n);
                     const auto val = relation(t.background, "value", n);
                     // in_list[v][node]: v is stored in the list starting at node.
                     Graph in_list(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
                     for (int node = 1; node < n; ++node) {
                       std::set<int> seen;
                       for (int cur = node; cur != 0 && !seen.count(cur);) {
                         seen.insert(cur);
                         for (int v = 0; v < n; ++v)
                           if (val[cur][v]) in_list[v][node] = 1;
                         int nxt = 0;
                         for (int k = 0; k < n; ++k)
                           if (next[cur][k]) nxt = k;
                         cur = nxt;
                       }
                     }
                     label_binary(t, n, [&](int x, int y) { return in_list[x][y] != 0; });
                   },
                   [random_list](Rng& rng, int n) {
                     FactSet bg;
                     const auto list = random_list(rng, n);
                     for (std::size_t i = 0; i < list.size(); ++i) {
                       bg.insert(atom("cons", list[i], i + 1 < list.size() ? list[i + 1] : 0));
                       bg.insert(atom("value", list[i], 1 + static_cast<int>(rng.uniform_int(static_cast<std::size_t>(n - 1)))));
                     }
                     return bg;
                   }};
    r["length"] = {{4, 8, 8, 8, 10, 2, false}, with_truth({input("cons", 2), input("succ", 2), input("zero", 1)}), 2,
                   [](IlpTask& t) {
                     const int n = count_n(t);
                     const auto next = relation(t.background, "cons", n);
                     label_binary(t, n, [&](int x, int y) {
                       int length = 0;
                       for (int cur = x; cur != 0 && length <= n;) {
                         ++length;
                         int nxt = 0;
                         for (int k = 0; k < n; ++k)
                           if (next[cur][k]) nxt = k;
                         cur = nxt;
                       }
                       return length == y;
                     });
                   },
                   [random_list](Rng& rng, int n) {
                     FactSet bg;
                     add_numbers(bg, n);
                     const auto list = random_list(rng, n);
                     for (std::size_t i = 0; i < list.size(); ++i)
                       bg.insert(atom("cons", list[i], i + 1 < list.size() ? list[i + 1] : 0));
                     return bg;
                   }};

    // Family trees.
    r["son"] = {{4, 4, 4, 9, 10, 3, false},
                with_truth({input("father", 2), input("brother", 2), input("sister", 2)}),
                2,
                [](IlpTask& t) {
                  const int n = count_n(t);
                  const auto father = relation(t.background, "father", n);
                  const auto brother = relation(t.background, "brother", n);
                  std::vector<char> male(static_cast<std::size_t>(n), 0);
                  for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y)
                      if (father[x][y] || brother[x][y]) male[x] = 1;
                  label_binary(t, n, [&](int x, int y) { return father[y][x] && male[x]; });
                },
                [](Rng& rng, int n) {
                  // Every child has at least one sibling, so the sex of each
                  // child is visible through brother/sister facts.
                  FactSet bg;
                  const auto people = rng.permutation(n);
                  std::vector<char> male(static_cast<std::size_t>(n), 0);
                  std::vector<int> childless_males;
                  std::vector<std::vector<int>> families;  // father first
                  std::size_t next = 0;
                  auto take = [&] { return people[next++]; };
                  while (people.size() - next >= 2) {
                    if (childless_males.empty()) {
                      const int root = take();
                      male[root] = 1;
                      childless_males.push_back(root);
                      if (people.size() - next < 2) break;
                    }
                    const auto pick = rng.uniform_int(childless_males.size());
                    const int dad = childless_males[pick];
                    childless_males.erase(childless_males.begin() + static_cast<std::ptrdiff_t>(pick));
                    std::size_t k = 2 + rng.uniform_int(2);
                    const std::size_t left = people.size() - next;
                    if (k > left || left - k == 1) k = std::min(left, k + 1);
                    families.push_back({dad});
                    for (std::size_t i = 0; i < k; ++i) {
                      const int child = take();
                      male[child] = rng.bernoulli(0.5) ? 1 : 0;
                      if (male[child]) childless_males.push_back(child);
                      families.back().push_back(child);
                    }
                  }
                  if (next < people.size()) {
                    if (families.empty()) {
                      families.push_back({take()});
                      male[families.back()[0]] = 1;
                    } else {
                      auto& fam = families[rng.uniform_int(families.size())];
                      const int child = take();
                      male[child] = rng.bernoulli(0.5) ? 1 : 0;
                      fam.push_back(child);
                    }
                  }
                  for (const auto& fam : families) {
                    for (std::size_t i = 1; i < fam.size(); ++i) {
                      bg.insert(atom("father", fam[0], fam[i]));
                      for (std::size_t j = 1; j < fam.size(); ++j)
                        if (i != j) bg.insert(atom(male[fam[i]] ? "brother" : "sister", fam[i], fam[j]));
                    }
                  }
                  return bg;
                }};
    r["grandparent"] = {{4, 4, 4, 9, 11, 3, false}, with_truth({input("father", 2), input("mother", 2)}), 2,
                        [](IlpTask& t) {
                          const int n = count_n(t);
                          const auto f = relation(t.background, "father", n);
                          const auto m = relation(t.background, "mother", n);
                          label_binary(t, n, [&](int x, int y) {
                            for (int z = 0; z < n; ++z)
                              if ((f[x][z] || m[x][z]) && (f[z][y] || m[z][y])) return true;
                            return false;
                          });
                        },
                        [](Rng& rng, int n) {
                          FactSet bg;
                          const auto people = rng.permutation(n);
                          std::vector<int> males, females;
                          for (int i = 0; i < n; ++i) {
                            const int p = people[i];
                            if (i >= 2) {
                              if (!males.empty() && rng.bernoulli(0.8))
                                bg.insert(atom("father", males[rng.uniform_int(males.size())], p));
                              if (!females.empty() && rng.bernoulli(0.8))
                                bg.insert(atom("mother", females[rng.uniform_int(females.size())], p));
                            }
                            (i == 0 || (i > 1 && rng.bernoulli(0.5)) ? males : females).push_back(p);
                          }
                          return bg;
                        }};
    r["relatedness"] = {{4, 10, 12, 8, 10, 2, false}, with_truth({input("parent", 2)}), 2,
                        [](IlpTask& t) {
                          const int n = count_n(t);
                          auto g = relation(t.background, "parent", n);
                          for (int x = 0; x < n; ++x)
                            for (int y = 0; y < n; ++y)
                              if (g[x][y]) g[y][x] = 1;
                          const auto reach = closure(g);
                          label_binary(t, n, [&](int x, int y) { return reach[x][y] != 0; });
                        },
                        [](Rng& rng, int n) {
                          FactSet bg;
                          const auto people = rng.permutation(n);
                          for (int i = 1; i < n; ++i)
                            if (rng.bernoulli(0.75))
                              bg.insert(atom("parent", people[rng.uniform_int(static_cast<std::size_t>(i))], people[i]));
                          return bg;
                        }};
    return r;
  }();
  return tasks;
}

const TaskInfo& info(const std::string& name) {
  const auto& r = registry();
  auto it = r.find(name);
  if (it == r.end()) throw TaskError("unknown task '" + name + "'");
  return it->second;
}

IlpTask make_task(const std::string& name, std::vector<std::string> constants, FactSet background) {
  const auto& ti = info(name);
  IlpTask task;
  task.name = name;
  task.constants = std::move(constants);
  task.background = std::move(background);
  task.target = {"target", ti.target_arity, PredicateKind::target};
  task.input_predicates = ti.inputs;
  ti.label(task);
  return task;
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {
      "predecessor", "undirected_edge", "less_than", "member",  "connectedness", "son",
      "grandparent", "adjacent_to_red", "two_children", "relatedness", "cyclic", "graph_coloring",
      "length",      "even_odd",        "even_succ2",   "buzz",        "fizz"};
  return names;
}

TaskDefaults task_defaults(const std::string& name) { return info(name).defaults; }

IlpTask generate_task(const TaskSpec& spec) {
  const auto& ti = info(spec.name);
  if (spec.num_constants < ti.defaults.min_constants)
    throw TaskError("task '" + spec.name + "' needs at least " + std::to_string(ti.defaults.min_constants) +
                    " constants, got " + std::to_string(spec.num_constants));
  const std::uint64_t seed = ti.defaults.deterministic ? 0 : spec.seed;
  Rng rng(mix_seed({fnv1a(spec.name), static_cast<std::uint64_t>(spec.num_constants), seed}));
  // Random instances are redrawn while either label set is empty.
  constexpr int kMaxRetries = 200;
  IlpTask task;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    task = make_task(spec.name, numbered_constants(spec.num_constants), ti.background(rng, spec.num_constants));
    if (ti.defaults.deterministic || (!task.positives.empty() && !task.negatives.empty())) break;
  }
  return task;
}

IlpTask label_task(const std::string& name, std::vector<std::string> constants, FactSet background) {
  // The labellers work on integer constant names; map arbitrary names onto
  // positions and back.
  std::map<std::string, std::string> to_index, to_name;
  for (std::size_t i = 0; i < constants.size(); ++i) {
    to_index[constants[i]] = std::to_string(i);
    to_name[std::to_string(i)] = constants[i];
  }
  auto rename = [](const GroundAtom& a, const std::map<std::string, std::string>& m) {
    GroundAtom out{a.predicate, {}};
    for (const auto& arg : a.args) {
      auto it = m.find(arg);
      if (it == m.end()) throw TaskError("constant '" + arg + "' of " + to_string(a) + " is not declared");
      out.args.push_back(it->second);
    }
    return out;
  };
  FactSet indexed;
  for (const auto& a : background) indexed.insert(rename(a, to_index));
  auto task = make_task(name, numbered_constants(static_cast<int>(constants.size())), indexed);
  auto back = [&](const FactSet& s) {
    FactSet out;
    for (const auto& a : s) out.insert(rename(a, to_name));
    return out;
  };
  task.constants = std::move(constants);
  task.background = back(task.background);
  task.positives = back(task.positives);
  task.negatives = back(task.negatives);
  return task;
}

IlpTask subsample_negatives(const IlpTask& task, const NegativeSampling& sampling) {
  if (!(sampling.keep_fraction > 0.0 && sampling.keep_fraction <= 1.0))
    throw TaskError("keep_fraction must be in (0, 1]");
  IlpTask out = task;
  if (sampling.keep_fraction == 1.0) return out;
  Rng rng(sampling.seed);
  out.negatives.clear();
  for (const auto& a : task.negatives)
    if (rng.bernoulli(sampling.keep_fraction)) out.negatives.insert(a);
  return out;
}

void validate_task(const IlpTask& task) {
  std::set<std::string> constants(task.constants.begin(), task.constants.end());
  if (constants.size() != task.constants.size()) throw TaskError("duplicate constants");
  std::map<std::string, int> arity;
  for (const auto& p : task.input_predicates) {
    if (!arity.emplace(p.name, p.arity).second) throw TaskError("duplicate predicate '" + p.name + "'");
    if (p.arity < 0 || p.arity > 2) throw TaskError("predicate '" + p.name + "' has unsupported arity");
  }
  if (!arity.count(std::string(kTrue)) || !arity.count(std::string(kFalse)))
    throw TaskError("true and false must be declared input predicates");
  if (arity.count(task.target.name)) throw TaskError("target name clashes with an input predicate");
  if (task.target.arity < 1 || task.target.arity > 2) throw TaskError("target arity must be 1 or 2");

  auto check = [&](const FactSet& atoms, const char* field, bool is_target) {
    std::size_t i = 0;
    for (const auto& a : atoms) {
      const std::string where = std::string(field) + "[" + std::to_string(i++) + "] " + to_string(a);
      const int expected = is_target ? task.target.arity : [&] {
        auto it = arity.find(a.predicate);
        if (it == arity.end()) throw TaskError(where + ": undeclared predicate");
        return it->second;
      }();
      if (is_target && a.predicate != task.target.name) throw TaskError(where + ": not an atom of the target");
      if (static_cast<int>(a.args.size()) != expected) throw TaskError(where + ": wrong arity");
      for (const auto& arg : a.args)
        if (!constants.count(arg)) throw TaskError(where + ": unknown constant '" + arg + "'");
    }
  };
  check(task.background, "background", false);
  check(task.positives, "positives", true);
  check(task.negatives, "negatives", true);
  for (const auto& a : task.positives)
    if (task.negatives.count(a)) throw TaskError("atom " + to_string(a) + " is both positive and negative");
}

std::optional<SymbolicProgram> reference_solution(const std::string& name) {
  static const std::map<std::string, std::string> programs = {
      {"predecessor", "target(X,Y) :- succ(Y,X).\n"},
      {"undirected_edge",
       "target(X,Y) :- aux1(X,Y), edge(Y,X).\n"
       "target(X,Y) :- edge(X,Y).\n"
       "aux1(X,Y) :- edge(Y,X).\n"},
      {"less_than",
       "target(X,Y) :- target(X,Z), target(Z,Y).\n"
       "target(X,Y) :- succ(X,Y).\n"},
      {"member",
       "target(X,Y) :- target(X,Z), aux1(Z,Y).\n"
       "target(X,Y) :- aux2(X,Y).\n"
       "aux1(X,Y) :- cons(Y,X).\n"
       "aux2(X,Y) :- value(Y,X).\n"},
      {"connectedness",
       "target(X,Y) :- target(X,Z), target(Z,Y).\n"
       "target(X,Y) :- edge(X,Y).\n"},
      {"son",
       "target(X,Y) :- aux1(X), father(Y,X).\n"
       "aux1(X) :- father(X,Z).\n"
       "aux1(X) :- brother(X,T).\n"},
      {"grandparent",
       "target(X,Y) :- aux1(X,Z), aux1(Z,Y).\n"
       "aux1(X,Y) :- mother(X,Y).\n"
       "aux1(X,Y) :- father(X,Y).\n"},
      {"adjacent_to_red",
       "target(X) :- aux2(X,Z), aux1(Z).\n"
       "aux1(X) :- colour(X,Z), red(Z).\n"
       "aux2(X,Y) :- edge(Y,X).\n"},
      {"two_children",
       "target(X) :- aux1(X,Z), aux2(Z,X).\n"
       "aux1(X,Y) :- edge(X,Z), neq(Z,Y).\n"
       "aux2(X,Y) :- edge(Y,X).\n"},
      {"relatedness",
       "target(X,Y) :- target(X,Z), target(Z,Y).\n"
       "target(X,Y) :- parent(X,Y).\n"
       "target(X,Y) :- aux1(X,Y).\n"
       "aux1(X,Y) :- parent(Y,X).\n"},
      {"cyclic",
       "target(X) :- aux1(X,Z), aux1(Z,X).\n"
       "aux1(X,Y) :- aux1(X,Z), edge(Z,Y).\n"
       "aux1(X,Y) :- edge(X,Y).\n"},
      {"graph_coloring",
       "target(X,Y) :- edge(X,Y), aux1(Y,X).\n"
       "aux1(X,Y) :- colour(X,Z), aux2(Z,Y).\n"
       "aux2(X,Y) :- colour(Y,X).\n"},
      {"even_odd",
       "target(X) :- zero(X).\n"
       "target(X) :- aux1(Z,X), zero(Z).\n"
       "aux1(X,Y) :- aux1(X,Z), aux1(Z,Y).\n"
       "aux1(X,Y) :- aux2(X,Y).\n"
       "aux2(X,Y) :- succ(X,Z), succ(Z,Y).\n"},
      {"buzz",
       "target(X) :- aux1(X,Z), pred2(Z,X).\n"
       "target(X) :- zero(X).\n"
       "aux1(X,Y) :- aux2(X,Z), pred1(Z,Y).\n"
       "aux2(X,Y) :- aux3(Y).\n"
       "aux2(X,Y) :- zero(X).\n"
       "aux3(X) :- aux1(X,Z), pred2(Z,X).\n"
       "aux3(X) :- zero(X).\n"},
  };
  auto key = name == "even_succ2" ? std::string("even_odd") : name;
  auto it = programs.find(key);
  if (it == programs.end()) return std::nullopt;
  return parse_program(it->second, "target");
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json atoms_to_json(const FactSet& atoms) {
  json arr = json::array();
  for (const auto& a : atoms) arr.push_back(to_string(a));
  return arr;
}

FactSet atoms_from_json(const json& doc, const char* field) {
  if (!doc.contains(field)) throw TaskError(std::string("missing field '") + field + "'");
  const auto& arr = doc.at(field);
  if (!arr.is_array()) throw TaskError(std::string("field '") + field + "' must be an array");
  FactSet out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = std::string(field) + "[" + std::to_string(i) + "]";
    if (!arr[i].is_string()) throw TaskError(where + ": expected an atom string");
    try {
      out.insert(parse_atom(arr[i].get<std::string>()));
    } catch (const LogicError& e) {
      throw TaskError(where + ": " + e.what());
    }
  }
  return out;
}

PredicateSymbol predicate_from_json(const json& j, const std::string& where, PredicateKind kind) {
  if (!j.is_object() || !j.contains("name") || !j.contains("arity") || !j.at("name").is_string() ||
      !j.at("arity").is_number_integer())
    throw TaskError(where + ": expected {\"name\": string, \"arity\": integer}");
  PredicateSymbol p{j.at("name").get<std::string>(), j.at("arity").get<int>(), kind};
  if (!is_identifier(p.name)) throw TaskError(where + ": invalid predicate name '" + p.name + "'");
  return p;
}

}  // namespace

std::string task_to_json(const IlpTask& task) {
  json doc;
  doc["name"] = task.name;
  doc["constants"] = task.constants;
  doc["predicates"] = json::array();
  for (const auto& p : task.input_predicates) doc["predicates"].push_back({{"name", p.name}, {"arity", p.arity}});
  doc["background"] = atoms_to_json(task.background);
  doc["positives"] = atoms_to_json(task.positives);
  doc["negatives"] = atoms_to_json(task.negatives);
  doc["target"] = {{"name", task.target.name}, {"arity", task.target.arity}};
  return doc.dump(2) + "\n";
}

IlpTask task_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TaskError(std::string("malformed task file: ") + e.what());
  }
  if (!doc.is_object()) throw TaskError("task file must hold a JSON object");
  IlpTask task;
  task.name = doc.value("name", std::string("custom"));
  if (!doc.contains("constants") || !doc.at("constants").is_array()) throw TaskError("missing field 'constants'");
  for (std::size_t i = 0; i < doc.at("constants").size(); ++i) {
    const auto& v = doc.at("constants")[i];
    if (!v.is_string() || !is_identifier(v.get<std::string>()))
      throw TaskError("constants[" + std::to_string(i) + "]: expected a lowercase identifier");
    task.constants.push_back(v.get<std::string>());
  }
  if (!doc.contains("predicates") || !doc.at("predicates").is_array()) throw TaskError("missing field 'predicates'");
  for (std::size_t i = 0; i < doc.at("predicates").size(); ++i)
    task.input_predicates.push_back(
        predicate_from_json(doc.at("predicates")[i], "predicates[" + std::to_string(i) + "]", PredicateKind::input));
  if (!doc.contains("target")) throw TaskError("missing field 'target'");
  task.target = predicate_from_json(doc.at("target"), "target", PredicateKind::target);
  task.background = atoms_from_json(doc, "background");
  task.positives = atoms_from_json(doc, "positives");
  task.negatives = atoms_from_json(doc, "negatives");
  validate_task(task);
  return task;
}

void save_task(const IlpTask& task, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TaskError("cannot write " + path.string());
  out << task_to_json(task);
}

IlpTask load_task(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TaskError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return task_from_json(buf.str());
  } catch (const TaskError& e) {
    throw TaskError(path.string() + ": " + e.what());
  }
}

}  // namespace hri

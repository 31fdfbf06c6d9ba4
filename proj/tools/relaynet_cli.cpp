// relaynet: plan and evaluate hijack-resilient relay placements over
// AS-level topologies, and simulate the relay-node protocol end to end.

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "relaynet/attack_analysis.hpp"
#include "relaynet/netsim.hpp"
#include "relaynet/parallel.hpp"
#include "relaynet/placement.hpp"

namespace {

constexpr const char* kVersion = "relaynet 1.0.0 (wire format v1)";

using namespace relaynet;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + out_path);
  out << content;
}

ASGraph load_graph(const std::string& rel_path, const std::string& weights_path) {
  ASGraph g = parse_relationships(read_file(rel_path));
  if (!weights_path.empty()) load_client_weights(g, read_file(weights_path));
  return g;
}

TieBreak tie_from_string(const std::string& s) {
  if (s == "attacker") return TieBreak{TieSide::FavorAttacker};
  if (s == "legit") return TieBreak{TieSide::FavorLegitimate};
  throw CLI::ValidationError("--tie must be 'attacker' or 'legit'");
}

std::vector<Asn> load_plan_relays(const std::string& path) {
  std::string text = read_file(path);
  std::vector<Asn> relays;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first) {  // header row
      first = false;
      if (line.rfind("round,", 0) == 0) continue;
    }
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');  // round
    if (!std::getline(row, field, ',')) throw ParseError("plan file: bad row '" + line + "'");
    relays.push_back(Asn(std::stoul(field)));
  }
  if (relays.empty()) throw ValidationError("plan file lists no relays: " + path);
  return relays;
}

std::string format_fraction(double v) {
  char buf[32];
  snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string cdf_csv(const std::vector<CdfPoint>& points, const char* xcol, const char* ycol) {
  std::ostringstream out;
  out << xcol << "," << ycol << "\n";
  for (const CdfPoint& p : points)
    out << format_fraction(p.x) << "," << format_fraction(p.y) << "\n";
  return out.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Routing-attack-resilient relay placement and relay-node protocol simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string rel_path, weights_path, out_path, tie = "attacker";
  int jobs = 1;

  // topo validate
  auto* topo = app.add_subcommand("topo", "Topology ingestion");
  auto* topo_validate = topo->add_subcommand("validate", "Parse inputs and report counts");
  topo_validate->add_option("--rel", rel_path, "relationship file")->required();
  topo_validate->add_option("--weights", weights_path, "client weights CSV");

  // route tree
  auto* route = app.add_subcommand("route", "Routing trees");
  auto* route_tree = route->add_subcommand("tree", "Best routes toward an origin, as CSV");
  uint32_t origin_asn = 0;
  route_tree->add_option("--rel", rel_path, "relationship file")->required();
  route_tree->add_option("--weights", weights_path, "client weights CSV");
  route_tree->add_option("--origin", origin_asn, "origin AS")->required();
  route_tree->add_option("--out", out_path, "output file (default stdout)");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Greedy relay placement");
  int plan_n = 6, plan_k = 1;
  plan_cmd->add_option("--rel", rel_path)->required();
  plan_cmd->add_option("--weights", weights_path)->required();
  plan_cmd->add_option("--n", plan_n, "number of relays")->required();
  plan_cmd->add_option("--k", plan_k, "required connectivity")->required();
  plan_cmd->add_option("--tie", tie, "tie side: attacker|legit");
  plan_cmd->add_option("--jobs", jobs, "parallel workers");
  plan_cmd->add_option("--out", out_path, "plan CSV output");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluation curves");
  std::string plan_path;
  auto* eval_part = eval->add_subcommand("partition-cdf", "Attacker partition power CDF");
  auto* eval_client = eval->add_subcommand("client-cdf", "Per-client vulnerability CDF");
  auto* eval_p24 = eval->add_subcommand("p24-baseline", "/24-hosting baseline attacker counts");
  for (CLI::App* c : {eval_part, eval_client}) {
    c->add_option("--rel", rel_path)->required();
    c->add_option("--weights", weights_path)->required();
    c->add_option("--plan", plan_path, "plan CSV from a prior 'plan' run")->required();
    c->add_option("--tie", tie);
    c->add_option("--jobs", jobs);
    c->add_option("--out", out_path);
  }
  uint32_t p24_victim = 0;
  eval_p24->add_option("--rel", rel_path)->required();
  eval_p24->add_option("--weights", weights_path)->required();
  eval_p24->add_option("--victim", p24_victim, "only this victim AS");
  eval_p24->add_option("--tie", tie);
  eval_p24->add_option("--out", out_path);

  // sim
  auto* sim = app.add_subcommand("sim", "Protocol simulation");
  auto* sim_run = sim->add_subcommand("run", "Run a scenario file");
  std::string scenario_path;
  uint64_t seed_override = 0;
  bool seed_set = false;
  sim_run->add_option("scenario", scenario_path, "scenario JSON")->required();
  sim_run->add_option("--seed", seed_override);
  sim_run->add_option("--out", out_path, "arrivals CSV output");
  std::string links_out;
  sim_run->add_option("--links-out", links_out, "per-link stats CSV output");

  auto* sim_ddos = sim->add_subcommand("ddos", "Run a scenario file with an abuser population");
  int abusers = 1000, rate = 20;
  double spoofed = 0.9;
  sim_ddos->add_option("scenario", scenario_path, "scenario JSON")->required();
  sim_ddos->add_option("--abusers", abusers, "abuser count");
  sim_ddos->add_option("--rate", rate, "abuser packets per second");
  sim_ddos->add_option("--spoofed", spoofed, "fraction of abusers using spoofed sources");
  sim_ddos->add_option("--seed", seed_override);
  sim_ddos->add_option("--out", out_path, "arrivals CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage errors
  }
  seed_set = sim_run->count("--seed") > 0 || sim_ddos->count("--seed") > 0;

  if (topo_validate->parsed()) {
    ASGraph g = load_graph(rel_path, weights_path);
    PeerGraph pg = candidate_relays(g);
    size_t p2c = 0, peer = 0;
    for (const Edge& e : g.edges()) (e.rel == Rel::ProviderCustomer ? p2c : peer)++;
    std::cout << "ases=" << g.size() << "\n"
              << "edges=" << g.edge_count() << " provider_customer=" << p2c
              << " peer_peer=" << peer << "\n"
              << "total_client_weight=" << g.total_weight() << "\n"
              << "weighted_ases=" << g.weighted_nodes().size() << "\n"
              << "relay_candidates=" << pg.nodes.size()
              << " candidate_peer_edges=" << pg.edge_count() << "\n";
    std::string round = serialize_relationships(parse_relationships(serialize_relationships(g)));
    std::cout << "roundtrip=" << (round == serialize_relationships(g) ? "ok" : "MISMATCH")
              << "\n";
    return 0;
  }

  if (route_tree->parsed()) {
    ASGraph g = load_graph(rel_path, weights_path);
    RoutingOutcome tree = routing_tree(g, origin_asn);
    std::ostringstream csv;
    csv << "asn,class,path\n";
    for (NodeId i = 0; i < NodeId(g.size()); ++i) {
      const RouteEntry& e = tree.at(i);
      csv << g.asn_of(i) << ",";
      if (!e.reachable) {
        csv << "unreachable,\n";
        continue;
      }
      csv << route_class_name(e.cls) << ",";
      auto path = tree.path(g, g.asn_of(i));
      for (size_t j = 0; j < path.size(); ++j) csv << (j ? " " : "") << path[j];
      csv << "\n";
    }
    write_output(out_path, csv.str());
    return 0;
  }

  if (plan_cmd->parsed()) {
    ASGraph g = load_graph(rel_path, weights_path);
    TieBreak tb = tie_from_string(tie);
    PeerGraph pg = candidate_relays(g);
    std::vector<Asn> candidates = k_core_candidates(pg, plan_k, plan_n);
    if (candidates.empty()) throw ValidationError("no candidate passes the k-core filter");

    // Scenario sets per candidate, computed once. Workers take contiguous
    // candidate slices so each thread reuses one routing-tree cache.
    std::vector<ScenarioSet> sets(candidates.size());
    {
      size_t workers = std::max<size_t>(1, std::min<size_t>(size_t(jobs), candidates.size()));
      std::vector<std::thread> pool;
      size_t chunk = (candidates.size() + workers - 1) / workers;
      for (size_t w = 0; w < workers; ++w) {
        size_t begin = w * chunk, end = std::min(candidates.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
          TreeCache cache(g);
          for (size_t i = begin; i < end; ++i)
            sets[i] = covered_scenarios(g, candidates[i], tb, cache);
        });
      }
      for (auto& t : pool) t.join();
    }
    std::unordered_map<Asn, const ScenarioSet*> by_asn;
    for (size_t i = 0; i < candidates.size(); ++i) by_asn[candidates[i]] = &sets[i];
    ScenarioFn fn = [&](Asn a) -> const ScenarioSet& { return *by_asn.at(a); };

    RelayPlan plan = locate_relays(g, pg, candidates, fn, plan_n, plan_k);
    std::ostringstream csv;
    csv << "round,asn,marginal_coverage,cumulative_coverage\n";
    for (size_t i = 0; i < plan.relays.size(); ++i)
      csv << i << "," << plan.relays[i] << "," << plan.marginal[i] << ","
          << plan.cumulative[i] << "\n";
    write_output(out_path, csv.str());
    double frac = plan.total_weight
                      ? double(plan.achieved_coverage) /
                            (double(plan.total_weight) * double(g.size() > 1 ? g.size() - 1 : 1))
                      : 0.0;
    std::cout << "relays=" << plan.relays.size() << "\n"
              << "achieved_coverage_weight=" << plan.achieved_coverage << "\n"
              << "coverage_fraction=" << format_fraction(frac) << "\n"
              << "verified_connectivity=" << plan.connectivity_certificate
              << " required=" << plan.required_connectivity << "\n";
    return 0;
  }

  if (eval_part->parsed() || eval_client->parsed()) {
    ASGraph g = load_graph(rel_path, weights_path);
    TieBreak tb = tie_from_string(tie);
    std::vector<Asn> relays = load_plan_relays(plan_path);
    if (eval_part->parsed()) {
      auto cdf = partition_cdf(g, relays, tb, jobs);
      write_output(out_path, cdf_csv(cdf, "disconnectable_client_fraction", "attacker_fraction"));
    } else {
      auto cdf = client_vulnerability_cdf(g, relays, tb, jobs);
      write_output(out_path, cdf_csv(cdf, "attacker_fraction", "client_fraction"));
    }
    return 0;
  }

  if (eval_p24->parsed()) {
    ASGraph g = load_graph(rel_path, weights_path);
    TieBreak tb = tie_from_string(tie);
    std::vector<Asn> bitcoin;
    for (NodeId v : g.weighted_nodes()) bitcoin.push_back(g.asn_of(v));
    if (bitcoin.empty()) throw ValidationError("p24 baseline: no weighted ASes");
    std::ostringstream csv;
    csv << "victim,attacker_count,attacker_fraction\n";
    for (Asn v : bitcoin) {
      if (p24_victim != 0 && v != p24_victim) continue;
      auto attackers = p24_baseline_attackers(g, v, bitcoin, tb);
      csv << v << "," << attackers.size() << ","
          << format_fraction(double(attackers.size()) / double(g.size() - 1)) << "\n";
    }
    write_output(out_path, csv.str());
    return 0;
  }

  if (sim_run->parsed() || sim_ddos->parsed()) {
    ScenarioConfig cfg = load_scenario(scenario_path);
    if (seed_set) cfg.seed = seed_override;
    Metrics m = sim_run->parsed() ? run_scenario(cfg)
                                  : ddos_scenario(cfg, rate, abusers, spoofed);
    if (!out_path.empty()) write_output(out_path, m.arrivals_csv());
    if (sim_run->parsed() && !links_out.empty()) write_output(links_out, m.links_csv());
    std::cout << m.summary();
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error&) {
    return 2;  // CLI11_PARSE already printed usage
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConnectivityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// End-to-end checks of the command-line tool against checked-in fixtures.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::printf("ok   %s\n", what.c_str());
  } else {
    std::printf("FAIL %s\n", what.c_str());
    ++failures;
  }
}

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string out_file = "/tmp/relaynet_cli_out.txt";
  std::string cmd = std::string(CLI_BINARY) + " " + args + " >" + out_file + " 2>&1";
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.status = WEXITSTATUS(rc);
  std::ifstream in(out_file);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const char* name) { return std::string(FIXTURE_DIR) + "/" + name; }

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

int main() {
  const std::string rel = fixture("nine_as.rel");
  const std::string weights = fixture("nine_as.weights");

  {
    RunResult r = run("--version");
    expect(r.status == 0 && contains(r.out, "wire format"), "--version prints versions");
  }
  {
    RunResult r = run("topo validate --rel " + rel + " --weights " + weights);
    expect(r.status == 0, "topo validate exits 0");
    expect(contains(r.out, "ases=9"), "topo validate counts ASes");
    expect(contains(r.out, "relay_candidates=3"), "topo validate finds candidates");
    expect(contains(r.out, "total_client_weight=8"), "topo validate sums weights");
    expect(contains(r.out, "roundtrip=ok"), "topo validate round-trips");
  }
  {
    RunResult r = run("topo validate --rel /nonexistent.rel");
    expect(r.status == 1, "missing input is a domain error (exit 1)");
  }
  {
    RunResult r = run("route tree --rel " + rel + " --origin 1");
    expect(r.status == 0, "route tree exits 0");
    expect(contains(r.out, "asn,class,path"), "route tree has a header row");
    expect(contains(r.out, "7,customer,7 1"), "route tree lists the customer route");
  }
  {
    RunResult r = run("plan --rel " + rel + " --weights " + weights +
                      " --n 2 --k 1 --tie attacker --out /tmp/plan.csv");
    expect(r.status == 0, "plan exits 0");
    std::string csv = slurp("/tmp/plan.csv");
    expect(contains(csv, "round,asn,marginal_coverage,cumulative_coverage"),
           "plan CSV header");
    int rows = 0;
    for (char c : csv)
      if (c == '\n') ++rows;
    expect(rows == 3, "plan CSV has one row per round");
    expect(contains(r.out, "verified_connectivity="), "plan prints the certificate");
  }
  {
    RunResult r = run("plan --rel " + rel + " --weights " + weights + " --n 3 --k 2 --out /tmp/plan3.csv");
    expect(r.status == 0, "triangle supports a 3-relay 2-connected plan");
    expect(contains(r.out, "verified_connectivity=2"), "certificate is 2 for the triangle");
  }
  {
    RunResult r = run("eval partition-cdf --rel " + rel + " --weights " + weights);
    expect(r.status == 2, "partition-cdf without --plan is a usage error (exit 2)");
  }
  {
    RunResult r = run("eval partition-cdf --rel " + rel + " --weights " + weights +
                      " --plan /tmp/plan3.csv --out /tmp/part.csv");
    expect(r.status == 0, "partition-cdf exits 0");
    std::string csv = slurp("/tmp/part.csv");
    expect(contains(csv, "disconnectable_client_fraction,attacker_fraction"),
           "partition CSV header");
    expect(contains(csv, "0,1"), "full protection shows as a zero row");
  }
  {
    RunResult r = run("eval client-cdf --rel " + rel + " --weights " + weights +
                      " --plan /tmp/plan3.csv --out /tmp/client.csv");
    expect(r.status == 0, "client-cdf exits 0");
    expect(contains(slurp("/tmp/client.csv"), "attacker_fraction,client_fraction"),
           "client CSV header");
  }
  {
    RunResult r = run("eval p24-baseline --rel " + rel + " --weights " + weights +
                      " --out /tmp/p24.csv");
    expect(r.status == 0, "p24-baseline exits 0");
    std::string csv = slurp("/tmp/p24.csv");
    expect(contains(csv, "victim,attacker_count,attacker_fraction"), "p24 CSV header");
  }
  {
    RunResult a = run("sim run " + fixture("partition_norelay.scenario.json") +
                      " --seed 7 --out /tmp/sim_a.csv");
    RunResult b = run("sim run " + fixture("partition_norelay.scenario.json") +
                      " --seed 7 --out /tmp/sim_b.csv");
    expect(a.status == 0 && b.status == 0, "sim run exits 0");
    expect(a.out == b.out, "same seed: byte-identical summaries");
    expect(slurp("/tmp/sim_a.csv") == slurp("/tmp/sim_b.csv"),
           "same seed: byte-identical CSV");
    expect(contains(a.out, "partition_verdict=partitioned"),
           "no-relay scenario is partitioned");
  }
  {
    RunResult r = run("sim run " + fixture("partition_relays.scenario.json") +
                      " --links-out /tmp/links.csv");
    expect(r.status == 0 && contains(r.out, "partition_verdict=connected"),
           "relay scenario stays connected");
    expect(contains(slurp("/tmp/links.csv"),
                    "link,sent,delivered,lost,adversary_dropped,inflight_at_stop"),
           "per-link stats CSV has its header");
  }
  {
    RunResult r = run("sim ddos " + fixture("ddos_small.scenario.json") +
                      " --abusers 500 --rate 20 --spoofed 0.9");
    expect(r.status == 0, "sim ddos exits 0");
    expect(contains(r.out, "benign_completed=5/5"), "benign clients finish under flood");
  }
  {
    RunResult r = run("plan --rel " + rel + " --weights " + weights + " --n 4 --k 2");
    expect(r.status == 1, "infeasible plan (only 3 candidates) is a domain error");
  }
  {
    RunResult r = run("bogus-subcommand");
    expect(r.status == 2, "unknown subcommand is a usage error");
  }
  {
    RunResult r = run("plan --rel " + rel + " --weights " + weights +
                      " --n 2 --k 1 --frobnicate");
    expect(r.status == 2, "unknown flag is a usage error");
  }

  if (failures) {
    std::printf("%d cli check(s) failed\n", failures);
    return 1;
  }
  std::printf("all cli checks passed\n");
  return 0;
}

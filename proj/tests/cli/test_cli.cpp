// End-to-end checks of the command-line tool: exit-code contract, artifact
// determinism, cache transparency. Invoked by ctest with the binary path.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "[ok] " << what << "\n";
  } else {
    std::cout << "[FAILED] " << what << "\n";
    ++failures;
  }
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: aqc_cli_checks <path-to-aqc>\n";
    return 2;
  }
  const std::string aqc = argv[1];
  const fs::path work = fs::temp_directory_path() / "aqc_cli_checks";
  fs::remove_all(work);
  fs::create_directories(work);

  // 1. rank certificate on the divergence operator
  write_file(work / "rank_ok.ini",
             "command = check-rank\nseed = 11\n[operator]\nname = div2d\n"
             "lambda_deterministic = 64\nlambda_random = 64\nx_samples = 4\n");
  expect(run(aqc + " check-rank " + (work / "rank_ok.ini").string() + " --output " +
             (work / "ok").string() + " > /dev/null") == 0,
         "check-rank div2d exits 0");
  expect(fs::exists(work / "ok" / "check_rank_certificate.csv"), "certificate artifact exists");

  // 2. negative test: rank varies, exit code 2, witness recorded
  write_file(work / "rank_bad.ini",
             "command = check-rank\nseed = 11\n[operator]\nname = diag-nonconstant-rank\n"
             "lambda_deterministic = 64\nlambda_random = 64\nx_samples = 4\n");
  expect(run(aqc + " check-rank " + (work / "rank_bad.ini").string() + " --output " +
             (work / "bad").string() + " > /dev/null") == 2,
         "check-rank diag-nonconstant-rank exits 2");
  expect(slurp(work / "bad" / "check_rank_report.txt").find("witness") != std::string::npos,
         "failure witness is reported");

  // 3. envelope slice determinism: identical seeds give identical bytes
  write_file(work / "env.ini",
             "command = envelope\nseed = 5\n[operator]\nname = div2d\n[density]\nname = dwell\n"
             "[envelope]\nxi_grid = -1:1:3,-1:1:3\nladder = 8,16\nrandom_starts = 2\n");
  expect(run(aqc + " envelope " + (work / "env.ini").string() + " --output " +
             (work / "env1").string() + " > /dev/null") == 0,
         "envelope slice exits 0");
  expect(run(aqc + " envelope " + (work / "env.ini").string() + " --output " +
             (work / "env2").string() + " > /dev/null") == 0,
         "envelope slice rerun exits 0");
  expect(slurp(work / "env1" / "envelope_slice.csv") ==
             slurp(work / "env2" / "envelope_slice.csv"),
         "envelope slice rerun is byte-identical");

  // 4. cache transparency: relax with and without the cache agrees bitwise
  write_file(work / "relax.ini",
             "command = relax\nseed = 9\n[operator]\nname = div2d\n[density]\nname = dwell\n"
             "[relax]\ngrid = 32\nr_ladder = 1,0.5\nm_ladder = 2,4\nquadrature = 2\n"
             "cell_ladder = 8,16\nrandom_starts = 1\n");
  expect(run(aqc + " relax " + (work / "relax.ini").string() + " --output " +
             (work / "rx1").string() + " > /dev/null") == 0,
         "relax benchmark exits 0");
  expect(run(aqc + " relax " + (work / "relax.ini").string() + " --no-cache --output " +
             (work / "rx2").string() + " > /dev/null") == 0,
         "relax without cache exits 0");
  expect(slurp(work / "rx1" / "relax_rhs.csv") == slurp(work / "rx2" / "relax_rhs.csv"),
         "purging the cache changes no rhs value");
  expect(slurp(work / "rx1" / "relax_ladder.csv") == slurp(work / "rx2" / "relax_ladder.csv"),
         "purging the cache changes no ladder value");

  // 5. config errors exit 3 and name the problem
  write_file(work / "broken.ini", "command = envelope\n[operator]\nname = div3d\n");
  expect(run(aqc + " envelope " + (work / "broken.ini").string() + " 2> " +
             (work / "broken.err").string()) == 3,
         "config errors exit 3");
  expect(slurp(work / "broken.err").find("div3d") != std::string::npos,
         "config error names the unresolvable label");

  // 6. decompose verdict on a small concentration ensemble
  write_file(work / "dec.ini",
             "command = decompose\nseed = 13\n[operator]\nname = div2d\n[decompose]\n"
             "grid = 32\nq = 2\nlabels = 4,8,16\nkind = concentration\n");
  expect(run(aqc + " decompose " + (work / "dec.ini").string() + " --output " +
             (work / "dec").string() + " > /dev/null") == 0,
         "decompose exits 0 on the concentration ensemble");

  // 7. output directory override via the environment
  expect(run("AQC_OUTPUT_DIR=" + (work / "envdir").string() + " " + aqc + " check-rank " +
             (work / "rank_ok.ini").string() + " > /dev/null") == 0,
         "environment override accepted");
  expect(fs::exists(work / "envdir" / "check_rank_report.txt"),
         "environment override directs artifacts");

  // 8. verify-prop22, small ladder
  write_file(work / "p22.ini",
             "command = verify-prop22\nseed = 17\n[operator]\nname = div2d\n[prop22]\n"
             "qs = 2\nensemble = 6\nladder = 8,16\neta = one\n");
  expect(run(aqc + " verify-prop22 " + (work / "p22.ini").string() + " --output " +
             (work / "p22").string() + " > /dev/null") == 0,
         "verify-prop22 exits 0");

  std::cout << (failures == 0 ? "all cli checks passed\n" : "cli checks FAILED\n");
  return failures == 0 ? 0 : 1;
}

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fm/cli.hpp"
#include "test_helpers.hpp"

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun result;
  result.code = fm::cli::run(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

// Scratch file that cleans up after itself.
class TempFile {
 public:
  TempFile(const std::string& stem, const std::string& content) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("fm_test_" + std::to_string(++counter) + "_" + stem))
                .string();
    std::ofstream out(path_, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

TEST_CASE("validate exit codes") {
  SECTION("valid corpus file exits 0") {
    const CliRun run = run_cli({"validate", fmtest::corpus_path("needle.fm")});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.empty());
  }
  SECTION("warnings do not fail validation") {
    const CliRun run = run_cli({"validate", fmtest::corpus_path("lewis.fm")});
    REQUIRE(run.code == 0);
    REQUIRE(run.err.find("warning[V-REGION]") != std::string::npos);
  }
  SECTION("a reception conflict exits 1 with one error") {
    TempFile file("recep.fm",
                  "sphere X { machine M { stages: receive, arrive } }\n");
    const CliRun run = run_cli({"validate", file.path()});
    REQUIRE(run.code == 1);
    REQUIRE(run.err.find("V-RECEP") != std::string::npos);
  }
  SECTION("syntax failures exit 2") {
    TempFile file("broken.fm", "sphere { {");
    const CliRun run = run_cli({"validate", file.path()});
    REQUIRE(run.code == 2);
  }
  SECTION("missing file exits 2") {
    const CliRun run = run_cli({"validate", "/nonexistent/never.fm"});
    REQUIRE(run.code == 2);
  }
  SECTION("doc format emits a JSON diagnostics document") {
    const CliRun run =
        run_cli({"validate", fmtest::corpus_path("lewis.fm"), "--format", "doc"});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.find("\"diagnostics\"") != std::string::npos);
    REQUIRE(run.out.find("\"V-REGION\"") != std::string::npos);
  }
}

TEST_CASE("fmt exit codes and idempotence") {
  SECTION("already-canonical file with --check exits 0") {
    const CliRun run =
        run_cli({"fmt", "--check", fmtest::corpus_path("phoebe.fm")});
    REQUIRE(run.code == 0);
  }
  SECTION("whitespace-perturbed copy is flagged and then fixed") {
    const std::string canonical =
        fmtest::read_file(fmtest::corpus_path("phoebe.fm"));
    TempFile file("perturbed.fm", "\n\n" + canonical + "   \n");
    REQUIRE(run_cli({"fmt", "--check", file.path()}).code == 1);
    REQUIRE(run_cli({"fmt", file.path()}).code == 0);
    REQUIRE(fmtest::read_file(file.path()) == canonical);
    // fmt twice = fmt once
    REQUIRE(run_cli({"fmt", file.path()}).code == 0);
    REQUIRE(fmtest::read_file(file.path()) == canonical);
    REQUIRE(run_cli({"fmt", "--check", file.path()}).code == 0);
  }
  SECTION("parse failure exits 2") {
    TempFile file("broken.fm", "machine without sphere");
    REQUIRE(run_cli({"fmt", file.path()}).code == 2);
  }
}

TEST_CASE("render exit codes and output") {
  SECTION("DOT lands on stdout without -o") {
    const CliRun run = run_cli({"render", fmtest::corpus_path("needle.fm")});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.rfind("digraph fm {", 0) == 0);
  }
  SECTION("-o writes the same bytes to a file") {
    TempFile out_file("out.dot", "");
    const CliRun direct = run_cli({"render", fmtest::corpus_path("needle.fm")});
    const CliRun to_file = run_cli({"render", fmtest::corpus_path("needle.fm"),
                                    "-o", out_file.path()});
    REQUIRE(to_file.code == 0);
    REQUIRE(to_file.out.empty());
    REQUIRE(fmtest::read_file(out_file.path()) == direct.out);
  }
  SECTION("unknown overlay event exits 1") {
    const CliRun run = run_cli(
        {"render", fmtest::corpus_path("needle.fm"), "--event", "Ghost"});
    REQUIRE(run.code == 1);
    REQUIRE(run.err.find("unknown event") != std::string::npos);
  }
  SECTION("overlay events color the diagram") {
    const CliRun run = run_cli({"render", fmtest::corpus_path("professor_car.fm"),
                                "--event", "V1", "--event", "V2"});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.find("cluster_legend") != std::string::npos);
  }
}

TEST_CASE("simulate exit codes and output") {
  SECTION("a corpus run emits a trace document") {
    const CliRun run =
        run_cli({"simulate", fmtest::corpus_path("needle.fm"), "--scenario",
                 fmtest::corpus_path("needle.fms")});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.find("\"NeedleEvent\"") != std::string::npos);
    REQUIRE(run.err.empty());
  }
  SECTION("timeline format") {
    const CliRun run =
        run_cli({"simulate", fmtest::corpus_path("robots_ball.fm"), "--scenario",
                 fmtest::corpus_path("robots.fms"), "--format", "timeline"});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.find("Robot1Receive") != std::string::npos);
  }
  SECTION("inline scenarios work") {
    const CliRun run =
        run_cli({"simulate", fmtest::corpus_path("phoebe.fm"), "--inline",
                 "inject Past.Feeding.create @ 0; max_ticks 6"});
    REQUIRE(run.code == 0);
    REQUIRE(run.out.find("FeedingEvent") != std::string::npos);
  }
  SECTION("--max-ticks 0 is a usage error") {
    const CliRun run =
        run_cli({"simulate", fmtest::corpus_path("phoebe.fm"), "--scenario",
                 fmtest::corpus_path("phoebe.fms"), "--max-ticks", "0"});
    REQUIRE(run.code == 2);
  }
  SECTION("a max-ticks override below an injection tick is a usage error") {
    const CliRun run =
        run_cli({"simulate", fmtest::corpus_path("phoebe.fm"), "--scenario",
                 fmtest::corpus_path("phoebe.fms"), "--max-ticks", "3"});
    REQUIRE(run.code == 2);
  }
  SECTION("a cutoff run warns but exits 0") {
    const CliRun run =
        run_cli({"simulate", fmtest::corpus_path("hyde_park.fm"), "--inline",
                 "inject HydePark.Gate.John.receive @ 0; max_ticks 3"});
    REQUIRE(run.code == 0);
    REQUIRE(run.err.find("max_ticks") != std::string::npos);
  }
  SECTION("exactly one scenario source is required") {
    REQUIRE(run_cli({"simulate", fmtest::corpus_path("phoebe.fm")}).code == 2);
    REQUIRE(run_cli({"simulate", fmtest::corpus_path("phoebe.fm"), "--scenario",
                     fmtest::corpus_path("phoebe.fms"), "--inline",
                     "max_ticks 3"})
                .code == 2);
  }
  SECTION("scenario syntax errors exit 2") {
    const CliRun run = run_cli(
        {"simulate", fmtest::corpus_path("phoebe.fm"), "--inline", "bogus"});
    REQUIRE(run.code == 2);
  }
  SECTION("unresolvable scenario paths exit 1") {
    const CliRun run =
        run_cli({"simulate", fmtest::corpus_path("phoebe.fm"), "--inline",
                 "inject Nowhere.X.create @ 0; max_ticks 4"});
    REQUIRE(run.code == 1);
  }
  SECTION("identical invocations produce identical bytes") {
    const std::vector<std::string> args = {
        "simulate", fmtest::corpus_path("professor_car.fm"), "--scenario",
        fmtest::corpus_path("withdelay.fms")};
    const CliRun a = run_cli(args);
    const CliRun b = run_cli(args);
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE(a.err == b.err);
  }
}

TEST_CASE("trace queries") {
  SECTION("contains answers the containment question") {
    const CliRun yes =
        run_cli({"trace", "contains", "--schema", fmtest::corpus_path("lewis.fm"),
                 "--outer", "WalkingSlowly", "--inner", "Walking"});
    REQUIRE(yes.code == 0);
    REQUIRE(yes.out == "true\n");
    const CliRun no =
        run_cli({"trace", "contains", "--schema", fmtest::corpus_path("lewis.fm"),
                 "--outer", "Walking", "--inner", "WalkingSlowly"});
    REQUIRE(no.code == 0);  // answers never affect the exit code
    REQUIRE(no.out == "false\n");
  }
  SECTION("implies mirrors contains") {
    const CliRun run =
        run_cli({"trace", "implies", "--schema", fmtest::corpus_path("lewis.fm"),
                 "--premise", "WalkingSlowly", "--conclusion", "Walking"});
    REQUIRE(run.code == 0);
    REQUIRE(run.out == "true\n");
  }
  SECTION("unknown event names are usage errors") {
    const CliRun run =
        run_cli({"trace", "contains", "--schema", fmtest::corpus_path("lewis.fm"),
                 "--outer", "Ghost", "--inner", "Walking"});
    REQUIRE(run.code == 2);
  }
  SECTION("subtrace and time work on trace documents") {
    const CliRun nodelay =
        run_cli({"simulate", fmtest::corpus_path("professor_car.fm"),
                 "--scenario", fmtest::corpus_path("nodelay.fms")});
    const CliRun withdelay =
        run_cli({"simulate", fmtest::corpus_path("professor_car.fm"),
                 "--scenario", fmtest::corpus_path("withdelay.fms")});
    TempFile nodelay_file("nodelay.trace", nodelay.out);
    TempFile withdelay_file("withdelay.trace", withdelay.out);

    const CliRun embeds =
        run_cli({"trace", "subtrace", "--of", withdelay_file.path(),
                 "--candidate", nodelay_file.path()});
    REQUIRE(embeds.code == 0);
    REQUIRE(embeds.out == "true\n");

    const CliRun reverse =
        run_cli({"trace", "subtrace", "--of", nodelay_file.path(),
                 "--candidate", withdelay_file.path()});
    REQUIRE(reverse.code == 0);
    REQUIRE(reverse.out == "false\n");

    const CliRun no_time =
        run_cli({"trace", "time", "--trace", nodelay_file.path()});
    REQUIRE(no_time.code == 0);
    REQUIRE(no_time.out == "12\n");
    const CliRun with_time =
        run_cli({"trace", "time", "--trace", withdelay_file.path()});
    REQUIRE(with_time.out == "19\n");
  }
  SECTION("a one-tick instance has trace time 1") {
    TempFile trace_file(
        "single.trace",
        "{\"meta\":{\"schema\":\"s\",\"scenario\":\"x\",\"terminated\":"
        "\"quiescence\"},\"events\":[{\"name\":\"E\",\"start\":0,\"end\":1,"
        "\"gaps\":[],\"group\":0}]}");
    const CliRun run = run_cli({"trace", "time", "--trace", trace_file.path()});
    REQUIRE(run.code == 0);
    REQUIRE(run.out == "1\n");
  }
  SECTION("unreadable or malformed trace files are usage errors") {
    REQUIRE(run_cli({"trace", "time", "--trace", "/nonexistent.trace"}).code ==
            2);
    TempFile junk("junk.trace", "not json");
    REQUIRE(run_cli({"trace", "time", "--trace", junk.path()}).code == 2);
  }
}

TEST_CASE("usage errors") {
  REQUIRE(run_cli({}).code == 2);
  REQUIRE(run_cli({"frobnicate"}).code == 2);
  REQUIRE(run_cli({"validate"}).code == 2);  // missing file argument
  REQUIRE(run_cli({"trace"}).code == 2);     // missing query
  const CliRun help = run_cli({"--help"});
  REQUIRE(help.code == 0);
  REQUIRE(help.out.find("validate") != std::string::npos);
}

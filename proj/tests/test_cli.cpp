#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / ("bnforge-cli-" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

// runs the bnforge binary with the working directory's store
RunResult run(const std::string& args) {
    fs::path out = work_dir() / "stdout.txt";
    fs::path err = work_dir() / "stderr.txt";
    std::string cmd = "BNFORGE_STORE='" + (work_dir() / "store").string() + "' '" + BNFORGE_BIN +
                      "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string demo_kb() { return std::string("'") + DEMO_KB + "'"; }

// demo KB with one Visual Detection probability perturbed by 0.05
fs::path perturbed_kb() {
    static fs::path path = [] {
        std::string text = slurp(DEMO_KB);
        auto at = text.find("(near) -> (0.85, 0.15)");
        REQUIRE(at != std::string::npos);
        text.replace(at, std::string("(near) -> (0.85, 0.15)").size(), "(near) -> (0.9, 0.1)");
        fs::path p = work_dir() / "perturbed.bnkb";
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }();
    return path;
}

} // namespace

TEST_CASE("review on the clean demo KB exits 0 and prints the stub inventory") {
    auto r = run("review " + demo_kb());
    CHECK(r.code == 0);
    CHECK(r.out.find("R6") != std::string::npos);
    CHECK(r.out.find("TEL Attrition Stub") != std::string::npos);
}

TEST_CASE("validate on the demo KB is clean") {
    auto r = run("validate " + demo_kb());
    CHECK(r.code == 0);
    CHECK(r.out.find("ok:") != std::string::npos);
}

TEST_CASE("infer with a misspelled variable exits 2 and names the identifier") {
    auto r = run("infer " + demo_kb() + " --target Dwelll");
    CHECK(r.code == 2);
    CHECK(r.err.find("Dwelll") != std::string::npos);
}

TEST_CASE("infer computes posteriors and handles evidence") {
    auto r = run("infer " + demo_kb() + " --target Dwell --evidence 'Current Activity=launch' --json");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema"] == "bnforge.posterior/1");
    // launch dwell row from the partition: (0.75, 0.2, 0.05)
    CHECK(j["targets"]["Dwell"]["probabilities"][0].get<double>() == doctest::Approx(0.75));
    CHECK(j["targets"]["Dwell"]["probabilities"][2].get<double>() == doctest::Approx(0.05));
}

TEST_CASE("every command is byte-deterministic") {
    const std::string commands[] = {
        "importance " + demo_kb() + " --focus Dwell --evidence 'Weather,Terrain Suitability' --json",
        "cases gen " + demo_kb() + " --scenario Unanticipated --json",
        "synergy " + demo_kb() +
            " --focus 'Battery Ready' --evidence 'Weather,Terrain Suitability,Optical Cue' --k 2 "
            "--samples 2 --seed 5 --json"};
    for (const std::string& args : commands) {
        auto a = run(args);
        auto b = run(args);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("importance report and JSON schema") {
    auto text = run("importance " + demo_kb() + " --focus Dwell --evidence 'Weather,Report Status'");
    REQUIRE(text.code == 0);
    CHECK(text.out.find("Importance Analysis for \"Dwell\"") != std::string::npos);
    CHECK(text.out.find("Current Observations: (none)") != std::string::npos);

    auto j = nlohmann::json::parse(
        run("importance " + demo_kb() + " --focus Dwell --evidence 'Weather,Report Status' --json").out);
    CHECK(j["schema"] == "bnforge.importance/1");
    REQUIRE(j["entries"].size() == 2);
    for (const auto& e : j["entries"]) {
        CHECK(e.contains("name"));
        CHECK(e.contains("importance"));
        CHECK(e.contains("score"));
        CHECK(e.contains("stars"));
        CHECK(e.contains("rank"));
    }
}

TEST_CASE("conflict command: supportive evidence passes, threshold flips the exit code") {
    auto r = run("conflict " + demo_kb() +
                 " --evidence 'Optical Cue=present' --evidence 'Signal Cue=present' --json");
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema"] == "bnforge.conflict/1");
    double bits = j["value_bits"].get<double>();
    CHECK(bits < 0.0); // both cues driven by the same activity support each other
    CHECK(r.code == 0);

    auto strict = run("conflict " + demo_kb() +
                      " --evidence 'Optical Cue=present' --evidence 'Signal Cue=absent' "
                      "--threshold 0.05");
    CHECK(strict.code == 1); // flagged at a tight threshold
    CHECK(strict.out.find("flagged") != std::string::npos);
}

TEST_CASE("cases gen lists cases with coverage; sampled outside scenario") {
    auto r = run("cases gen " + demo_kb() + " --scenario Unanticipated --json");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["cases"].size() == 3);
    for (const auto& c : j["cases"]) {
        bool inside = c["assignments"]["Weather"] == "clear" &&
                      (c["assignments"]["Current Activity"] == "setup" ||
                       c["assignments"]["Current Activity"] == "launch");
        CHECK_FALSE(inside);
    }
}

TEST_CASE("golden workflow: record, self-compare, perturb, regression exit code") {
    fs::path golden = work_dir() / "dwell.golden.json";
    auto rec = run("cases record " + demo_kb() + " --scenario 'Dwell Review' --golden '" +
                   golden.string() + "'");
    REQUIRE(rec.code == 0);

    auto self_cmp = run("cases compare " + demo_kb() + " --scenario 'Dwell Review' --golden '" +
                        golden.string() + "'");
    CHECK(self_cmp.code == 0);
    CHECK(self_cmp.out.find("pass") != std::string::npos);

    // the perturbed CPT feeds Visual Detection, d-separated from Dwell: still passes
    auto dsep = run("cases compare '" + perturbed_kb().string() + "' --scenario 'Dwell Review' --golden '" +
                    golden.string() + "'");
    CHECK(dsep.code == 0);

    // a detection-focused scenario sees the perturbation
    fs::path det_golden = work_dir() / "det.golden.json";
    REQUIRE(run("cases record " + demo_kb() + " --scenario 'Detection Sweep' --golden '" +
                det_golden.string() + "'").code == 0);
    auto broken = run("cases compare '" + perturbed_kb().string() +
                      "' --scenario 'Detection Sweep' --golden '" + det_golden.string() + "'");
    CHECK(broken.code == 1);
    CHECK(broken.out.find("regression") != std::string::npos);
    CHECK(broken.out.find("Visual Detection") != std::string::npos);
    // the co-focused SCUD Detected is d-separated from the perturbed CPT
    CHECK(broken.out.find("SCUD Detected") == std::string::npos);

    // huge tolerance silences it
    auto loose = run("cases compare '" + perturbed_kb().string() +
                     "' --scenario 'Detection Sweep' --golden '" + det_golden.string() +
                     "' --tol 1");
    CHECK(loose.code == 0);
}

TEST_CASE("cases run reports impossible cases as data") {
    auto r = run("cases run " + demo_kb() + " --scenario 'Detection Sweep' --json");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema"] == "bnforge.run/1");
    for (const auto& c : j["cases"]) {
        CHECK(c.contains("impossible"));
        if (!c["impossible"].get<bool>()) {
            CHECK(c.contains("focus"));
            CHECK(c["focus"].contains("SCUD Detected"));
        }
    }
}

TEST_CASE("snapshot, log and diff round the version store") {
    auto s1 = run("snapshot " + demo_kb() + " -m 'baseline' -r 'initial elicitation'");
    REQUIRE(s1.code == 0);
    std::string id1 = s1.out.substr(0, s1.out.find('\n'));
    CHECK(id1.size() == 64);

    // identical content: same id
    auto again = run("snapshot " + demo_kb() + " -m 'noop' -r 'same content'");
    CHECK(again.out.substr(0, 64) == id1);

    auto s2 = run("snapshot '" + perturbed_kb().string() + "' -m 'tune detection' -r 'expert feedback'");
    REQUIRE(s2.code == 0);
    std::string id2 = s2.out.substr(0, 64);
    CHECK(id2 != id1);

    auto log = run("log --json");
    auto lj = nlohmann::json::parse(log.out);
    REQUIRE(lj["entries"].size() == 2);
    CHECK(lj["entries"][0]["id"] == id1);
    CHECK(lj["entries"][1]["id"] == id2);
    CHECK(lj["entries"][1]["parent"] == id1);

    auto d = run("diff " + id1 + " " + id2 + " --json");
    auto dj = nlohmann::json::parse(d.out);
    REQUIRE(dj["entries"].size() == 1);
    CHECK(dj["entries"][0]["kind"] == "cpt-row");
    CHECK(dj["entries"][0]["path"].get<std::string>().find("Visual Detection") != std::string::npos);

    CHECK(run("diff " + id1 + " " + id1).out.find("no differences") != std::string::npos);
    CHECK(run("diff " + id1 + " feedfeed").code == 2);
}

TEST_CASE("compile writes the documented network JSON") {
    fs::path out = work_dir() / "net.json";
    auto r = run("compile " + demo_kb() + " --out '" + out.string() + "'");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["schema"] == "bnforge.net/1");
    CHECK(j["variables"].size() == 15);
    bool found = false;
    for (const auto& v : j["variables"])
        if (v["name"] == "SCUD Detected") {
            found = true;
            CHECK(v["provenance"]["form"] == "noisyor");
            CHECK(v["provenance"]["fragment"] == "Sensing");
        }
    CHECK(found);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run("frobnicate").code == 2);
    CHECK(run("infer").code == 2);
    CHECK(run("cases gen " + demo_kb() + " --scenario NoSuchScenario").code == 2);
    CHECK(run("infer " + demo_kb() + " --target Dwell --evidence 'not-an-assignment'").code == 2);
    CHECK(run("infer " + demo_kb() + " --target Dwell --evidence Weather=clear "
              "--evidence Weather=storm").code == 2);
}

TEST_CASE("validate and review emit schema-tagged JSON") {
    auto v = nlohmann::json::parse(run("validate " + demo_kb() + " --json").out);
    CHECK(v["schema"] == "bnforge.validation/1");
    CHECK(v["findings"].empty());
    CHECK(v["constraint_violations"].empty());

    auto r = nlohmann::json::parse(run("review " + demo_kb() + " --json").out);
    CHECK(r["schema"] == "bnforge.review/1");
    REQUIRE(r["findings"].size() == 1);
    CHECK(r["findings"][0]["rule"] == "R6");
    CHECK(r["findings"][0]["severity"] == "info");
    CHECK(r["findings"][0]["location"]["line"].get<int>() > 0);
}

TEST_CASE("a KB that fails composition exits 1 with the error class") {
    fs::path bad = work_dir() / "bad.bnkb";
    std::ofstream(bad, std::ios::binary) << R"(
fragment F2 {
  input A states {t,f}
  var B states {t,f} partition (A) { element (*) rationale "flat" -> (0.5, 0.5) }
}
model { use F2 }
)";
    auto r = run("validate '" + bad.string() + "'");
    CHECK(r.code == 1);
    CHECK(r.out.find("UnboundInput") != std::string::npos);
}

TEST_CASE("syntactically broken KBs exit 2 with a span diagnostic") {
    fs::path broken = work_dir() / "broken.bnkb";
    std::ofstream(broken, std::ios::binary) << "fragment F { var A states {t,f} prior (0.3 0.7 }\n";
    auto r = run("validate '" + broken.string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("broken.bnkb:1:") != std::string::npos);
}

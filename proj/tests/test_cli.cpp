#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hopf/parse.hpp"

using json = nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/hopf_cli_test_") + name;
}

// Runs the installed binary with stderr captured to a side file.
RunResult run_cli(const std::string& args, const std::string& stdin_text = "") {
    const std::string err_path = temp_path("stderr.txt");
    std::string command;
    if (!stdin_text.empty()) {
        const std::string in_path = temp_path("stdin.txt");
        spit(in_path, stdin_text);
        command = std::string(HOPF_CLI_PATH) + " " + args + " < " + in_path;
    } else {
        command = std::string(HOPF_CLI_PATH) + " " + args;
    }
    command += " 2>" + err_path;

    RunResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> chunk{};
    std::size_t got = 0;
    while ((got = fread(chunk.data(), 1, chunk.size(), pipe)) > 0)
        result.out.append(chunk.data(), got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.err = slurp(err_path);
    return result;
}

std::string write_spec(const std::string& name, const json& doc) {
    const std::string path = temp_path(name);
    spit(path, doc.dump());
    return path;
}

json shear_spec() {
    return json{{"dimension", 2},
                {"truncation_degree", 8},
                {"map", {"z1/2 + z2^2", "z2/3"}}};
}

json resonant_spec() {
    return json{{"dimension", 2},
                {"truncation_degree", 8},
                {"map", {"z1/2", "z2/4 + z1^2"}}};
}

}  // namespace

TEST_CASE("linearize emits a parseable conjugacy with clean residuals") {
    const std::string path = write_spec("shear.json", shear_spec());
    const RunResult r = run_cli("linearize " + path);
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.out);
    CHECK(report["outcome"] == "ok");
    CHECK(report["command"] == "linearize");
    CHECK(report.contains("conventions"));
    CHECK(report["residuals"]["conjugacy"]["value"].get<double>() <= 1e-12);

    // The printed series re-parses to the expected coefficient.
    const std::string u1 = report["payload"]["change"][0].get<std::string>();
    const hopf::TruncatedSeries s = hopf::parse_series(u1, 2, 8);
    CHECK(std::abs(s.coefficient(hopf::MonomialIndex({0, 2})) -
                   hopf::Complex(18.0 / 7.0, 0.0)) <= 1e-12);
}

TEST_CASE("reports are deterministic once the timing field is stripped") {
    const std::string path = write_spec("shear2.json", shear_spec());
    const RunResult a = run_cli("linearize " + path);
    const RunResult b = run_cli("linearize " + path);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    json ra = json::parse(a.out), rb = json::parse(b.out);
    CHECK(ra.contains("wall_time_ms"));
    ra.erase("wall_time_ms");
    rb.erase("wall_time_ms");
    CHECK(ra.dump() == rb.dump());
}

TEST_CASE("input hash tracks the input document") {
    const std::string p1 = write_spec("hash1.json", shear_spec());
    json other = shear_spec();
    other["truncation_degree"] = 9;
    const std::string p2 = write_spec("hash2.json", other);
    const json r1 = json::parse(run_cli("resonance " + p1).out);
    const json r1b = json::parse(run_cli("resonance " + p1).out);
    const json r2 = json::parse(run_cli("resonance " + p2).out);
    CHECK(r1["input_hash"] == r1b["input_hash"]);
    CHECK(r1["input_hash"] != r2["input_hash"]);
}

TEST_CASE("resonant input maps to exit 2 with the relation in the report") {
    const std::string path = write_spec("resonant.json", resonant_spec());

    const RunResult lin = run_cli("linearize " + path);
    CHECK(lin.exit_code == 2);
    const json lr = json::parse(lin.out);
    CHECK(lr["outcome"] == "resonant_input");
    REQUIRE(lr["payload"]["relations"].size() == 1);
    CHECK(lr["payload"]["relations"][0]["target"] == 2);
    CHECK(lr["payload"]["relations"][0]["exponents"] == json::array({2, 0}));

    const RunResult nf = run_cli("normal-form " + path);
    CHECK(nf.exit_code == 0);
    const json nr = json::parse(nf.out);
    CHECK(nr["outcome"] == "ok");
    REQUIRE(nr["payload"]["kept_monomials"].size() == 1);
    CHECK(nr["payload"]["kept_monomials"][0]["component"] == 2);
    CHECK(nr["payload"]["kept_monomials"][0]["exponents"] == json::array({2, 0}));

    const RunResult conn = run_cli("connection " + path);
    CHECK(conn.exit_code == 2);
    const json cr = json::parse(conn.out);
    CHECK(cr["outcome"] == "resonance_obstruction");
    CHECK(cr["payload"]["degree"] == 0);
}

TEST_CASE("borderline divisors map to exit 3") {
    const json doc{{"dimension", 2},
                   {"truncation_degree", 10},
                   {"map", {"z1/2 + z2^2", "0.0009765625100*z2 + z1^10"}}};
    const std::string path = write_spec("ill.json", doc);
    const RunResult r = run_cli("linearize " + path);
    CHECK(r.exit_code == 3);
    CHECK(json::parse(r.out)["outcome"] == "ill_conditioned");
}

TEST_CASE("invalid inputs map to exit 4 with a pointed message") {
    json expanding = shear_spec();
    expanding["map"][0] = "1.5*z1";
    const RunResult grow = run_cli("linearize " + write_spec("grow.json", expanding));
    CHECK(grow.exit_code == 4);
    CHECK(grow.err.find("not a contraction") != std::string::npos);

    json missing = shear_spec();
    missing.erase("truncation_degree");
    const RunResult miss = run_cli("linearize " + write_spec("missing.json", missing));
    CHECK(miss.exit_code == 4);
    CHECK(miss.err.find("truncation_degree") != std::string::npos);

    json badmap = shear_spec();
    badmap["map"][1] = "z2/3 + ";
    const RunResult bad = run_cli("linearize " + write_spec("badmap.json", badmap));
    CHECK(bad.exit_code == 4);
    CHECK(bad.err.find("map") != std::string::npos);

    const std::string garbled = temp_path("garbled.json");
    spit(garbled, "{not json");
    CHECK(run_cli("linearize " + garbled).exit_code == 4);

    CHECK(run_cli("linearize /does/not/exist.json").exit_code == 4);
    CHECK(run_cli("linearize").exit_code == 4);
    CHECK(run_cli("frobnicate").exit_code == 4);
}

TEST_CASE("documents arrive over stdin and leave through --out") {
    const std::string out_path = temp_path("report_out.json");
    std::remove(out_path.c_str());
    const RunResult r =
        run_cli("resonance - --quiet --out " + out_path, shear_spec().dump());
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());  // --quiet suppresses stdout
    const json report = json::parse(slurp(out_path));
    CHECK(report["outcome"] == "ok");
    CHECK(report["payload"]["relations"].empty());

    // Without --quiet the same report also lands on stdout.
    const RunResult loud = run_cli("resonance -", shear_spec().dump());
    CHECK(loud.exit_code == 0);
    json echoed = json::parse(loud.out);
    CHECK(echoed["input_hash"] == report["input_hash"]);
}

TEST_CASE("tolerance accepts rational text in the document") {
    json doc = shear_spec();
    doc["tolerance"] = "1/1000000";
    const RunResult r = run_cli("linearize " + write_spec("ratio_tol.json", doc));
    CHECK(r.exit_code == 0);
    CHECK(json::parse(r.out)["input"]["tolerance"].get<double>() == 1e-6);
}

TEST_CASE("cohomology runs from a bare spectrum") {
    const RunResult canonical =
        run_cli("cohomology --alpha 0.5,1/3,0.2 --bundle canonical");
    REQUIRE(canonical.exit_code == 0);
    CHECK(json::parse(canonical.out)["payload"]["dims"] == json::array({0, 0, 1, 1}));

    const RunResult trivial = run_cli("cohomology --alpha 0.5,1/3,0.2");
    CHECK(json::parse(trivial.out)["payload"]["dims"] == json::array({1, 1, 0, 0}));

    const RunResult tensor = run_cli("cohomology --alpha 0.5,1/3,0.2 --bundle tensor:0,2,0");
    CHECK(json::parse(tensor.out)["payload"]["dims"] == json::array({0, 0, 0, 0}));

    const RunResult line = run_cli("cohomology --alpha 0.5,1/3,0.2 --bundle line:1/2");
    const json lr = json::parse(line.out);
    CHECK(lr["payload"]["dims"] == json::array({1, 1, 0, 0}));
    REQUIRE(lr["payload"]["witnesses"].size() == 1);
    CHECK(lr["payload"]["witnesses"][0]["exponents"] == json::array({1, 0, 0}));

    CHECK(run_cli("cohomology --alpha 0.5,0.25").exit_code == 4);   // needs n >= 3
    CHECK(run_cli("cohomology").exit_code == 4);                    // needs a spectrum
    CHECK(run_cli("cohomology --alpha 0.5,1/3,0.2 --bundle nope").exit_code == 4);
}

TEST_CASE("cohomology reads bundle specs from the document") {
    json doc{{"dimension", 3},
             {"truncation_degree", 4},
             {"map", {"z1/2", "z2/3", "z3/5"}},
             {"bundle", {{"tensor", {{"p", 0}, {"q", 1}, {"k_can", 0}}}}}};
    const RunResult r = run_cli("cohomology " + write_spec("coh_doc.json", doc));
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.out)["payload"]["dims"] == json::array({0, 0, 0, 0}));

    // A non-diagonal linear part cannot feed the spectrum implicitly.
    json offdiag{{"dimension", 2},
                 {"truncation_degree", 4},
                 {"map", {"z1/2 + z2/8", "z2/3"}}};
    const RunResult bad = run_cli("cohomology " + write_spec("coh_off.json", offdiag));
    CHECK(bad.exit_code == 4);
    CHECK(bad.err.find("diagonal") != std::string::npos);
}

TEST_CASE("connection accepts an explicit cocycle document") {
    json doc{{"dimension", 2},
             {"truncation_degree", 6},
             {"map", {"z1/2 + z2^2", "z2/3"}}};
    doc["bundle"]["rank"] = 2;
    doc["bundle"]["cocycle"] =
        json::array({json::array({"1", "z1"}), json::array({"0", "1 + z2"})});
    const RunResult r = run_cli("connection " + write_spec("conn_doc.json", doc));
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.out);
    CHECK(report["outcome"] == "ok");
    CHECK(report["residuals"]["fixed_point"]["value"].get<double>() <= 1e-9);
    CHECK(report["residuals"]["curvature"]["value"].get<double>() <= 1e-9);
    // A rank-2 bundle over a 2-dimensional base also reports torsion.
    CHECK(report["residuals"].contains("torsion"));
    // Non-tangent bundles do not produce a conjugacy payload.
    CHECK(!report["payload"].contains("change"));
}

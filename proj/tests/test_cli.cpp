#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result
{
    int status = -1;
    std::string out;
};

Result
run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " " + XLRA_CLI_PATH + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    {
        r.out.append(buf.data(), n);
    }
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string
slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path
scratch_dir()
{
    const fs::path dir = fs::temp_directory_path() / ("xlra_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

int
data_lines(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    int n = 0;
    bool header_seen = false;
    while (std::getline(in, line))
    {
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        if (!header_seen)
        {
            header_seen = true;
            continue;
        }
        ++n;
    }
    return n;
}

constexpr const char* kCheap = "--K 200 --trials 2 --blocks 10 --pa 0.05";

} // namespace

TEST_CASE("run prints one row with the configuration embedded")
{
    const auto r = run(std::string("run ") + kCheap);
    CHECK(r.status == 0);
    CHECK(data_lines(r.out) == 1);
    CHECK(r.out.rfind("# xlra run\n", 0) == 0);
    CHECK(r.out.find("# K = 200\n") != std::string::npos);
    CHECK(r.out.find("# delta = -300\n") != std::string::npos);
}

TEST_CASE("negative numbers parse as flag values")
{
    const auto r = run(std::string("run ") + kCheap + " --delta -250");
    CHECK(r.status == 0);
    CHECK(r.out.find("# delta = -250\n") != std::string::npos);
}

TEST_CASE("configuration errors exit with status 2")
{
    CHECK(run(std::string("run ") + kCheap + " --B 7").status == 2);
    CHECK(run(std::string("run ") + kCheap + " --pa 2").status == 2);
    CHECK(run(std::string("run ") + kCheap + " --protocol aloha").status == 2);
    CHECK(run("run --bogus").status == 2);
    CHECK(run("").status != 0);

    const fs::path dir = scratch_dir();
    std::ofstream(dir / "empty.spec") << "K =\n";
    CHECK(run("sweep " + (dir / "empty.spec").string()).status == 2);
    std::ofstream(dir / "unknown.spec") << "colour = blue\n";
    CHECK(run("sweep " + (dir / "unknown.spec").string()).status == 2);
    CHECK(run("sweep " + (dir / "missing.spec").string()).status == 2);
}

TEST_CASE("sweep writes wide and long tables and is reproducible")
{
    const fs::path dir = scratch_dir();
    std::ofstream(dir / "grid.spec") << "protocol = sucre-xl, nvr-xl\nK = 100, 200\nB = 5, 10\ndelta = -300\n"
                                     << "trials = 2\nblocks = 8\npa = 0.05\n";
    const std::string spec = (dir / "grid.spec").string();
    REQUIRE(run("sweep " + spec + " --out " + (dir / "a.csv").string()).status == 0);
    REQUIRE(run("sweep " + spec + " --out " + (dir / "b.csv").string()).status == 0);
    const std::string a = slurp(dir / "a.csv");
    CHECK(data_lines(a) == 8);
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a.find("# protocol = sucre-xl, nvr-xl\n") != std::string::npos);
    REQUIRE(fs::exists(dir / "a.long.csv"));
    CHECK(data_lines(slurp(dir / "a.long.csv")) == 32);
    CHECK(slurp(dir / "a.long.csv") == slurp(dir / "b.long.csv"));

    SUBCASE("worker count does not change the output")
    {
        const auto w1 = run("sweep " + spec, "XLRA_WORKERS=1");
        const auto w4 = run("sweep " + spec, "XLRA_WORKERS=4");
        const auto w8 = run("sweep " + spec, "XLRA_WORKERS=8");
        CHECK(w1.status == 0);
        CHECK(w1.out == w4.out);
        CHECK(w1.out == w8.out);
    }
}

TEST_CASE("a result file reruns to identical output")
{
    const fs::path dir = scratch_dir();
    const std::string first = (dir / "first.csv").string();
    REQUIRE(run(std::string("run ") + kCheap + " --protocol sucre-xl --out " + first).status == 0);
    const auto again = run("run --config " + first);
    CHECK(again.status == 0);
    CHECK(again.out == slurp(first));
}

TEST_CASE("tune-delta")
{
    const fs::path dir = scratch_dir();
    std::ofstream(dir / "one.spec") << "K = 200\nB = 10\ndelta = -275\ntrials = 2\nblocks = 10\npa = 0.05\n";
    const auto one = run("tune-delta " + (dir / "one.spec").string());
    CHECK(one.status == 0);
    CHECK(one.out.find("delta_star=-275\n") != std::string::npos);

    std::ofstream(dir / "grid.spec") << "K = 200\nB = 10\ndelta = -100:0:50\ntrials = 2\nblocks = 10\npa = 0.05\n";
    const auto att = run("tune-delta " + (dir / "grid.spec").string() + " --objective attempts");
    CHECK(att.status == 0);
    CHECK(att.out.find("delta,objective,objective_ci95,samples\n") != std::string::npos);
    CHECK(att.out.find("delta_star=") != std::string::npos);
    CHECK(data_lines(att.out) == 4); // three grid points plus the delta_star line

    CHECK(run("tune-delta " + (dir / "grid.spec").string() + " --objective speed").status == 2);
}

TEST_CASE("dump-scenario")
{
    const auto csv = run("dump-scenario --K 3 --B 5 --trial 1");
    CHECK(csv.status == 0);
    CHECK(data_lines(csv.out) == 15);
    const auto json = run("dump-scenario --K 3 --B 5 --format json");
    CHECK(json.status == 0);
    CHECK(json.out.find("\"users\"") != std::string::npos);
    CHECK(run("dump-scenario --format xml").status == 2);
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "support/toy_corpus.hpp"
#include "techtexc/corpus.hpp"

using namespace techtexc;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(TECHTEXC_CLI_PATH) + " " + args;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

struct CliFixture {
    fs::path dir;
    fs::path train_tsv;
    fs::path dev_tsv;
    fs::path ckpt;

    CliFixture() {
        dir = fs::temp_directory_path() / "techtexc_cli_test";
        fs::create_directories(dir);
        train_tsv = dir / "train.tsv";
        dev_tsv = dir / "dev.tsv";
        ckpt = dir / "toy.ckpt";
        write_dataset(testsupport::make_toy_corpus(20, 501), train_tsv);
        write_dataset(testsupport::make_toy_corpus(8, 502), dev_tsv);
    }

    std::string train_args(const fs::path& out, std::uint64_t seed) const {
        std::ostringstream os;
        os << "train --train-file " << train_tsv << " --dev-file " << dev_tsv
           << " --model cnn-bilstm --out " << out << " --seq-len 20 --embedding-dim 16"
           << " --batch-size 16 --epochs 40 --seed " << seed;
        return os.str();
    }
};

} // namespace

TEST_CASE("cli contract") {
    CliFixture fx;

    SUBCASE("missing required flags exit with code 2") {
        CHECK(run("train --train-file " + fx.train_tsv.string() + " 2>/dev/null") == 2);
        CHECK(run("2>/dev/null") == 2);
        CHECK(run("train --no-such-flag 2>/dev/null") == 2);
        CHECK(run("--help >/dev/null") == 0);
    }

    SUBCASE("train, evaluate, predict round trip") {
        const fs::path report = fx.dir / "train_report.txt";
        REQUIRE(run(fx.train_args(fx.ckpt, 42) + " > " + report.string() + " 2>/dev/null") == 0);
        CHECK(slurp(report).find("accuracy=") != std::string::npos);

        // checkpoint begins with the format magic
        std::ifstream in(fx.ckpt, std::ios::binary);
        char magic[8];
        in.read(magic, 8);
        CHECK(std::string(magic, 8) == "TTXC0001");

        // history file carries one key=value line per epoch
        const std::string history = slurp(fx.ckpt.string() + ".history");
        CHECK(history.rfind("epoch=1 train_loss=", 0) == 0);
        CHECK(count_lines(history) >= 1);

        SUBCASE("evaluate writes one prediction per data line") {
            const fs::path preds = fx.dir / "preds.txt";
            REQUIRE(run("evaluate --checkpoint " + fx.ckpt.string() + " --data " +
                        fx.dev_tsv.string() + " --pred-out " + preds.string() +
                        " >/dev/null 2>&1") == 0);
            CHECK(count_lines(slurp(preds)) == count_lines(slurp(fx.dev_tsv)));
        }

        SUBCASE("unknown label in evaluation data names the label, exit 1") {
            const fs::path bad = fx.dir / "bad.tsv";
            std::ofstream out(bad, std::ios::binary);
            out << "some text\tnot-a-label\n";
            out.close();
            const fs::path errfile = fx.dir / "stderr.txt";
            CHECK(run("evaluate --checkpoint " + fx.ckpt.string() + " --data " + bad.string() +
                      " >/dev/null 2>" + errfile.string()) == 1);
            CHECK(slurp(errfile).find("not-a-label") != std::string::npos);
        }

        SUBCASE("predict emits label and six-decimal probabilities per input line") {
            const fs::path input = fx.dir / "input.txt";
            {
                std::ofstream out(input, std::ios::binary);
                out << "database is fast\n";
                out << "single\n"; // short-text rule is train-only
                out << "network network design\n";
            }
            const fs::path output = fx.dir / "output.txt";
            REQUIRE(run("predict --checkpoint " + fx.ckpt.string() + " --input " +
                        input.string() + " --output " + output.string() + " 2>/dev/null") == 0);
            const std::string text = slurp(output);
            REQUIRE(count_lines(text) == 3);

            std::istringstream lines(text);
            std::string line;
            std::vector<std::string> parsed;
            while (std::getline(lines, line)) {
                parsed.push_back(line);
                const std::size_t tab = line.find('\t');
                REQUIRE(tab != std::string::npos);
                // probabilities parse back and sum to one
                double sum = 0.0;
                std::istringstream ps(line.substr(tab + 1));
                std::string field;
                std::size_t count = 0;
                while (std::getline(ps, field, ',')) {
                    sum += std::stod(field);
                    ++count;
                }
                CHECK(count == 4);
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
            }

            SUBCASE("reordering input lines reorders output lines identically") {
                const fs::path rinput = fx.dir / "input_r.txt";
                {
                    std::ofstream out(rinput, std::ios::binary);
                    out << "network network design\n";
                    out << "database is fast\n";
                    out << "single\n";
                }
                const fs::path routput = fx.dir / "output_r.txt";
                REQUIRE(run("predict --checkpoint " + fx.ckpt.string() + " --input " +
                            rinput.string() + " --output " + routput.string() +
                            " 2>/dev/null") == 0);
                std::istringstream rlines(slurp(routput));
                std::vector<std::string> rparsed;
                while (std::getline(rlines, line)) rparsed.push_back(line);
                REQUIRE(rparsed.size() == 3);
                CHECK(rparsed[0] == parsed[2]);
                CHECK(rparsed[1] == parsed[0]);
                CHECK(rparsed[2] == parsed[1]);
            }
        }

        SUBCASE("empty input exits 0 with empty output and a warning") {
            const fs::path input = fx.dir / "empty.txt";
            std::ofstream(input, std::ios::binary).flush();
            const fs::path output = fx.dir / "empty_out.txt";
            const fs::path errfile = fx.dir / "empty_err.txt";
            CHECK(run("predict --checkpoint " + fx.ckpt.string() + " --input " +
                      input.string() + " --output " + output.string() + " 2>" +
                      errfile.string()) == 0);
            CHECK(slurp(output).empty());
            CHECK(slurp(errfile).find("empty") != std::string::npos);
        }

        SUBCASE("corrupted checkpoint magic exits 1 with a header message") {
            const fs::path broken = fx.dir / "broken.ckpt";
            fs::copy_file(fx.ckpt, broken, fs::copy_options::overwrite_existing);
            std::fstream f(broken, std::ios::binary | std::ios::in | std::ios::out);
            f.write("XXXX", 4);
            f.close();
            const fs::path errfile = fx.dir / "hdr_err.txt";
            CHECK(run("evaluate --checkpoint " + broken.string() + " --data " +
                      fx.dev_tsv.string() + " >/dev/null 2>" + errfile.string()) == 1);
            CHECK(slurp(errfile).find("bad checkpoint header") != std::string::npos);
        }
    }

    SUBCASE("identical seeds give identical history files") {
        const fs::path a = fx.dir / "a.ckpt";
        const fs::path b = fx.dir / "b.ckpt";
        REQUIRE(run(fx.train_args(a, 7) + " >/dev/null 2>&1") == 0);
        REQUIRE(run(fx.train_args(b, 7) + " >/dev/null 2>&1") == 0);
        const std::string ha = slurp(a.string() + ".history");
        CHECK(ha == slurp(b.string() + ".history"));
        CHECK(!ha.empty());

        const fs::path c = fx.dir / "c.ckpt";
        REQUIRE(run(fx.train_args(c, 8) + " >/dev/null 2>&1") == 0);
        CHECK(ha != slurp(c.string() + ".history"));
    }
}

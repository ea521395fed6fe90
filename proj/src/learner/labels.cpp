#include <xcfuzz/learner/labels.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <map>
#include <sstream>
#include <tuple>

namespace xcfuzz::learner
{
    using nlohmann::json;

    std::vector<LabelVote> parse_label_lines(std::string const &text, std::string const &source)
    {
        std::vector<LabelVote> out;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            try {
                auto const j = json::parse(line);
                LabelVote v;
                v.contract = j.at("contract").get<std::string>();
                v.function = j.at("function").get<std::string>();
                v.category = oracles::category_from_string(j.at("category").get<std::string>());
                v.voter = j.at("voterId").get<std::string>();
                v.flag = j.at("flag").get<bool>();
                out.push_back(std::move(v));
            }
            catch (std::exception const &e) {
                throw LabelError(fmt::format("{}:{}: {}", source, lineno, e.what()));
            }
        }
        return out;
    }

    std::string format_label_lines(std::span<LabelVote const> votes)
    {
        std::string out;
        for (auto const &v : votes) {
            json j;
            j["contract"] = v.contract;
            j["function"] = v.function;
            j["category"] = std::string(oracles::to_string(v.category));
            j["voterId"] = v.voter;
            j["flag"] = v.flag;
            out += j.dump();
            out += '\n';
        }
        return out;
    }

    std::vector<LabelRecord> aggregate_labels(std::span<LabelVote const> votes)
    {
        std::map<std::tuple<std::string, std::string, VulnCategory>, Votes> grouped;
        for (auto const &v : votes) {
            grouped[{v.contract, v.function, v.category}][v.voter] = v.flag;
        }
        std::vector<LabelRecord> out;
        for (auto const &[key, vs] : grouped) {
            auto const &[contract, function, category] = key;
            out.push_back({contract, function, category, vs, majority_label(vs, category)});
        }
        return out;
    }

    std::vector<LabelVote> vote_corpus(std::span<vm::ContractPackage const> packages)
    {
        std::vector<LabelVote> out;
        for (auto const &pkg : packages) {
            for (auto const &fn : pkg.functions) {
                for (auto const &[voter, flags] : run_voters(pkg, fn)) {
                    for (auto const &[category, flag] : flags) {
                        out.push_back(
                            {pkg.name, fn.name, category, std::string(to_string(voter)), flag});
                    }
                }
            }
        }
        return out;
    }
}

#include "abgp/node/journal.hpp"

#include "abgp/errors.hpp"
#include "abgp/log.hpp"

#include <filesystem>
#include <map>
#include <vector>

namespace abgp::node {

JournalWriter::JournalWriter(std::string path, const records::ClusterSpec& cluster)
    : out_(path, std::ios::app | std::ios::binary), cluster_(cluster) {
    if (!out_) {
        throw Error(Errc::ConfigError, "cannot open journal for append: " + path);
    }
}

void JournalWriter::append(const records::RecordModel& record) {
    out_ << records::record_to_json(record, cluster_, /*include_state_hash=*/true) << '\n';
    out_.flush();
}

std::size_t replay_journal(const std::string& path, state::StateStore& store) {
    if (!std::filesystem::exists(path)) return 0;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::InternalError, "cannot read journal: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }

    // latest line per hash wins; keep the order of the winning lines
    std::map<records::Digest, std::size_t> winner;
    std::vector<std::optional<records::RecordModel>> parsed(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto result =
            records::record_from_json(lines[i], store.cluster(), /*accept_state_hash=*/true);
        if (!result.record) {
            if (i + 1 == lines.size()) {
                ABGP_LOG_WARN("journal: dropping torn final line (" << result.error << ")");
                break;
            }
            throw Error(Errc::InternalError,
                        "journal line " + std::to_string(i + 1) + " is corrupt: " + result.error);
        }
        winner[result.record->hash] = i;
        parsed[i] = std::move(*result.record);
    }

    std::size_t restored = 0;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        if (!parsed[i]) continue;
        if (winner.at(parsed[i]->hash) != i) continue;  // superseded later
        store.restore_record(std::move(*parsed[i]));
        ++restored;
    }
    return restored;
}

}  // namespace abgp::node

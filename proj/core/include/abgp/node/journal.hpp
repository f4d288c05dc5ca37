#pragma once

#include "abgp/state.hpp"

#include <fstream>
#include <string>

namespace abgp::node {

/// Append-only newline-delimited JSON, one record per line in the wire schema
/// plus a stateHash field. A mutated record is re-appended; the latest line
/// per hash wins on replay.
class JournalWriter {
public:
    /// Throws Error{ConfigError} when the file cannot be opened for append.
    JournalWriter(std::string path, const records::ClusterSpec& cluster);

    void append(const records::RecordModel& record);

private:
    std::ofstream out_;
    const records::ClusterSpec cluster_;
};

/// Replays a journal into an empty store, last line per hash winning, in file
/// order of the winning lines. A torn final line (crash mid-write) is dropped;
/// corruption anywhere else throws Error{InternalError}. Returns the number of
/// records restored. Missing file restores nothing.
std::size_t replay_journal(const std::string& path, state::StateStore& store);

}  // namespace abgp::node

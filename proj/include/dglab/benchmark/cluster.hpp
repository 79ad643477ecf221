#pragma once

#include <string>
#include <vector>

#include "dglab/benchmark/executor.hpp"
#include "dglab/benchmark/jobs.hpp"

namespace dglab {

struct ClusterTemplate {
    std::string partition = "cpu";
    std::string time_limit = "01:00:00";
    std::string memory = "4G";
    std::string cli = "dglab";  // command the scripts invoke
};

struct ClusterScripts {
    std::vector<fs::path> job_scripts;
    fs::path submit_all;
};

/// Writes one scheduler script per job plus submit_all.sh under
/// out_dir/cluster. Scripts reference their configs and results by paths
/// relative to the script directory, so the tree can be moved as a whole.
/// Nothing is submitted.
inline ClusterScripts emit_cluster_scripts(const std::vector<JobSpec>& jobs, const fs::path& out_dir,
                                           const ClusterTemplate& tpl = {}) {
    const fs::path dir = out_dir / "cluster";
    ensure_writable_dir(dir / "configs");
    ensure_writable_dir(dir / "logs");
    ensure_writable_dir(results_dir(out_dir));
    write_manifest(jobs, out_dir);

    ClusterScripts out;
    std::string submit = "#!/bin/sh\nset -e\ncd \"$(dirname \"$0\")\"\n";
    for (const auto& job : jobs) {
        const std::string id = job.id();
        write_atomic(dir / "configs" / (id + ".yaml"), job.config_text());
        std::string s;
        s += "#!/bin/sh\n";
        s += "#SBATCH --job-name=" + id + "\n";
        s += "#SBATCH --partition=" + tpl.partition + "\n";
        s += "#SBATCH --time=" + tpl.time_limit + "\n";
        s += "#SBATCH --mem=" + tpl.memory + "\n";
        s += "#SBATCH --ntasks=1\n";
        s += "#SBATCH --cpus-per-task=1\n";
        s += "#SBATCH --output=logs/" + id + ".out\n";
        s += "cd \"$(dirname \"$0\")\"\n";
        s += tpl.cli + " run --config configs/" + id + ".yaml --result ../results/" + id + ".json\n";
        const fs::path script = dir / (id + ".sh");
        write_atomic(script, s);
        fs::permissions(script, fs::perms::owner_exec | fs::perms::group_exec, fs::perm_options::add);
        out.job_scripts.push_back(script);
        submit += "sbatch " + id + ".sh\n";
    }
    out.submit_all = dir / "submit_all.sh";
    write_atomic(out.submit_all, submit);
    fs::permissions(out.submit_all, fs::perms::owner_exec | fs::perms::group_exec, fs::perm_options::add);
    return out;
}

}  // namespace dglab

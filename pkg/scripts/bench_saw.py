#!/usr/bin/env python3

import argparse
import json
import logging
import sys
import threading
import time
from pathlib import Path

import psutil

from cayleywalk.controller import GroupController
from cayleywalk.config import load_config
from cayleywalk.saw import count_saws

logging.basicConfig(level=logging.INFO, format='%(asctime)s - SAW-BENCH - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


class SawBenchmark:
    def __init__(self, group: str, max_len: int, prefix_depth: int = 3):
        self.group = group
        self.max_len = max_len
        self.prefix_depth = prefix_depth
        self.monitoring = False
        self.peak_rss_mb = 0.0
        self.results = []
        self.controller = GroupController(load_config())

    def _rss_mb(self) -> float:
        process = psutil.Process()
        rss = process.memory_info().rss
        for child in process.children(recursive=True):
            try:
                rss += child.memory_info().rss
            except psutil.Error:
                pass
        return rss / (1024 * 1024)

    def monitor_memory(self, interval: float = 0.5):
        """Track peak resident memory of this process and its workers."""
        while self.monitoring:
            self.peak_rss_mb = max(self.peak_rss_mb, self._rss_mb())
            time.sleep(interval)

    def run(self, worker_counts):
        logger.info(f"📋 Loading {self.group} and building the ball of radius {self.max_len}...")
        self.controller.load_group(self.group)
        start = time.time()
        ball = self.controller.ball(self.max_len)
        logger.info(f"✅ Ball ready: {ball.vertex_count} vertices in {time.time() - start:.2f}s")

        for workers in worker_counts:
            logger.info(f"🚀 Counting SAWs up to n={self.max_len} with {workers} worker(s)")
            self.peak_rss_mb = 0.0
            self.monitoring = True
            watcher = threading.Thread(target=self.monitor_memory, daemon=True)
            watcher.start()
            try:
                report = count_saws(ball, self.max_len, workers, self.prefix_depth)
            finally:
                self.monitoring = False
                watcher.join()
            rate = report.nodes_visited / report.wall_time if report.wall_time > 0 else 0.0
            self.results.append({
                "workers": workers,
                "wall_time": round(report.wall_time, 3),
                "nodes_visited": report.nodes_visited,
                "nodes_per_second": round(rate),
                "peak_rss_mb": round(self.peak_rss_mb, 1),
                "sigma_n": report.counts[-1],
            })
            logger.info(f"📊 {workers} worker(s): {report.wall_time:.2f}s, sigma_{self.max_len} = {report.counts[-1]}")

        sigmas = {r["sigma_n"] for r in self.results}
        if len(sigmas) > 1:
            logger.error(f"❌ Worker counts disagree: {sorted(sigmas)}")
            return False
        return True

    def print_summary(self):
        memory = psutil.virtual_memory()
        print("\n📊 SAW BENCHMARK")
        print("=" * 50)
        print(f"Group: {self.group}   n = {self.max_len}")
        print(f"System memory: {memory.total / 1024 ** 3:.1f}GB total, {memory.available / 1024 ** 3:.1f}GB available")
        for r in self.results:
            print(f"  {r['workers']:>3} worker(s)  {r['wall_time']:>8.2f}s  "
                  f"{r['nodes_per_second']:>12,} nodes/s  peak {r['peak_rss_mb']:.0f}MB")


def main():
    parser = argparse.ArgumentParser(description='Time SAW enumeration across worker counts')
    parser.add_argument('--group', default='z2', help='Group to enumerate on')
    parser.add_argument('--max-len', type=int, default=14, help='Walk length')
    parser.add_argument('--workers', default='1,2,4', help='Comma-separated worker counts')
    parser.add_argument('--prefix-depth', type=int, default=3, help='Prefix depth for work splitting')
    parser.add_argument('--json-out', help='Write results to this JSON file')

    args = parser.parse_args()
    worker_counts = [int(w) for w in args.workers.split(',') if w.strip()]

    bench = SawBenchmark(args.group, args.max_len, args.prefix_depth)
    try:
        consistent = bench.run(worker_counts)
    except KeyboardInterrupt:
        logger.info("🛑 Benchmark stopped by user")
        return 1

    bench.print_summary()
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(bench.results, indent=2))
        logger.info(f"✅ Results written to {args.json_out}")
    return 0 if consistent else 1


if __name__ == "__main__":
    sys.exit(main())

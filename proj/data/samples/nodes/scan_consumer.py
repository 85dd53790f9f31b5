# Copyright 2026 The Help Desk Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import rclpy
from rclpy.node import Node
from sensor_msgs.msg import LaserScan

STALL_AFTER_S = 1.0


class ScanConsumer(Node):
    def __init__(self):
        super().__init__("scan_out_consumer")
        self.declare_parameter("topic", "/scan_out")
        topic = self.get_parameter("topic").value
        self.last_seen = self.get_clock().now()
        self.stalled = False
        self.sub = self.create_subscription(LaserScan, topic, self.on_scan, 10)
        self.timer = self.create_timer(0.1, self.watch)

    def on_scan(self, msg):
        self.last_seen = self.get_clock().now()
        self.stalled = False
        nearest = min(r for r in msg.ranges if r > msg.range_min)
        self.get_logger().debug(f"nearest obstacle {nearest:.2f} m")

    def watch(self):
        quiet = (self.get_clock().now() - self.last_seen).nanoseconds / 1e9
        if quiet > STALL_AFTER_S and not self.stalled:
            self.stalled = True
            self.get_logger().error("no data on /scan_out")


def main():
    rclpy.init()
    rclpy.spin(ScanConsumer())


if __name__ == "__main__":
    main()

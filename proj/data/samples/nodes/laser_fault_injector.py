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

import random
import time

import rclpy
import yaml
from rclpy.node import Node
from sensor_msgs.msg import LaserScan

CONFIG_PATH = "config/lidar_fault.yaml"


class LaserFaultInjector(Node):
    def __init__(self):
        super().__init__("laser_fault_injector")
        with open(CONFIG_PATH) as f:
            cfg = yaml.safe_load(f)
        self.error_type = cfg["error_type"]
        self.error_value = float(cfg["error_value"])
        self.error_frequency = float(cfg["error_frequency"])
        self.rng = random.Random(cfg.get("seed", 0))
        self.pub = self.create_publisher(LaserScan, cfg["output_topic"], 10)
        self.sub = self.create_subscription(LaserScan, cfg["input_topic"], self.on_scan, 10)

    def on_scan(self, msg):
        if self.rng.random() >= self.error_frequency:
            self.pub.publish(msg)
            return
        self.apply_fault(msg)

    def apply_fault(self, msg):
        if self.error_type == "corrupted":
            msg.ranges = [self.error_value] * len(msg.ranges)
            self.pub.publish(msg)
        elif self.error_type == "delay":
            time.sleep(self.error_value / 1000.0)
            self.pub.publish(msg)
        # "drop": nothing is republished


def main():
    rclpy.init()
    rclpy.spin(LaserFaultInjector())


if __name__ == "__main__":
    main()

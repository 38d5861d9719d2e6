/** Fixed-interval polling with overlap protection: a slow fetch never stacks
 * behind the next tick. Default cadence 2 s. */

export interface Poller {
  stop(): void;
}

export function startPolling(
  tick: () => Promise<void>,
  intervalMs = 2000,
): Poller {
  let running = true;
  let inFlight = false;

  const timer = setInterval(async () => {
    if (!running || inFlight) return;
    inFlight = true;
    try {
      await tick();
    } finally {
      inFlight = false;
    }
  }, intervalMs);

  // immediate first paint
  void (async () => {
    inFlight = true;
    try {
      await tick();
    } finally {
      inFlight = false;
    }
  })();

  return {
    stop() {
      running = false;
      clearInterval(timer);
    },
  };
}

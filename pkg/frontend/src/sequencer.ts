/**
 * Latest-wins ordering for overlapping in-flight requests.
 *
 * Each submission takes a ticket; a response may only be applied if no
 * response with a newer ticket has been applied already, so a slow early
 * request can never overwrite a faster later one.
 */
export class RequestSequencer {
  private nextTicket = 0;
  private newestApplied = -1;

  issue(): number {
    return this.nextTicket++;
  }

  /** True exactly once per ticket, and only while it is still the newest. */
  shouldApply(ticket: number): boolean {
    if (ticket <= this.newestApplied) return false;
    this.newestApplied = ticket;
    return true;
  }

  /** Ticket of the most recently applied response (for tests/debugging). */
  get applied(): number {
    return this.newestApplied;
  }
}
